//! Model manifolds with one-dimensional symmetry reduction and the discrete
//! operators acting on symmetric fields.
//!
//! Three families are supported:
//!
//! * [`ManifoldKind::FlatTorus`]: `T^n` with side lengths `L_1..L_n`; fields
//!   depend on the first coordinate only, sampled on `N` periodic nodes.
//! * [`ManifoldKind::RoundSphere`]: `S^n` with metric `rho^2(t) * g_round`,
//!   where `rho^2(t) = r0^2 - 2(n-1) t`; fields depend on the polar angle.
//! * [`ManifoldKind::RotSymSurface`]: a rotationally symmetric 2-sphere with
//!   metric `e^{2 phi(theta)} (dtheta^2 + sin^2 theta dpsi^2)`. The warp
//!   profile is `w = e^phi sin(theta)`, which closes smoothly at both poles.
//!
//! The polar families use the uniform grid `theta_j = j pi / N`, `j = 0..=N`,
//! which contains both poles. The Laplace-Beltrami operator is written in
//! finite-volume flux form on the cells `[theta_j - h/2, theta_j + h/2]`
//! (clipped at the poles), so `sum_j W_j (Delta f)_j` telescopes to zero for
//! the volume weights `W_j` returned by [`volume_weights`]. At a pole the
//! scheme reproduces the smooth-closure limit `n f_tt / rho^2` to `O(h^2)`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of grid cells.
pub const MIN_CELLS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    FlatTorus,
    RoundSphere,
    RotSymSurface,
}

impl ManifoldKind {
    pub fn name(self) -> &'static str {
        match self {
            ManifoldKind::FlatTorus => "flat_torus",
            ManifoldKind::RoundSphere => "round_sphere",
            ManifoldKind::RotSymSurface => "rotsym_surface",
        }
    }

    pub fn is_polar(self) -> bool {
        !matches!(self, ManifoldKind::FlatTorus)
    }
}

/// Metric coefficients of a [`ManifoldState`].
#[derive(Clone, Debug, PartialEq)]
pub enum MetricData {
    /// Side lengths; the first one is the period of the sampled coordinate.
    FlatTorus { lengths: Vec<f64> },
    /// `rho^2` at `t = 0`; the current value follows from the state time.
    RoundSphere { initial_radius_sq: f64 },
    /// Log conformal factor `phi` per polar node.
    RotSymSurface { log_conformal: Vec<f64> },
}

/// Grid identity carried by every [`ScalarField`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridTag {
    pub kind: ManifoldKind,
    pub cells: usize,
}

#[derive(Debug)]
struct Stencil {
    h: f64,
    /// `sin^{n-1}` at the faces `theta_{j+1/2}`, `j = 0..N-1` (polar only).
    face: Vec<f64>,
    /// `int_{cell_j} sin^{n-1} dtheta` (polar only).
    cell: Vec<f64>,
    /// `cot(theta_j)`; unused at the poles.
    cot: Vec<f64>,
    /// Area of the unit `S^{n-1}`.
    angular_volume: f64,
}

/// A model manifold at a fixed time.
#[derive(Clone, Debug)]
pub struct ManifoldState {
    kind: ManifoldKind,
    dim: usize,
    cells: usize,
    metric: MetricData,
    time: f64,
    stencil: Arc<Stencil>,
}

impl PartialEq for ManifoldState {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.dim == other.dim
            && self.cells == other.cells
            && self.metric == other.metric
            && self.time == other.time
    }
}

// 8-point Gauss-Legendre rule on [-1, 1].
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

fn gauss_legendre(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    half * GL_NODES
        .iter()
        .zip(GL_WEIGHTS.iter())
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
}

/// `Gamma(k / 2)` for a positive integer `k`.
fn gamma_half(k: usize) -> f64 {
    let (mut x, mut g) = if k.is_multiple_of(2) { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
    while 2.0 * x < k as f64 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Area of the unit sphere `S^{m}` sitting in `R^{m+1}`.
pub fn unit_sphere_area(m: usize) -> f64 {
    let k = m + 1;
    2.0 * PI.powf(k as f64 / 2.0) / gamma_half(k)
}

impl Stencil {
    fn torus(length: f64, cells: usize) -> Self {
        Stencil {
            h: length / cells as f64,
            face: Vec::new(),
            cell: Vec::new(),
            cot: Vec::new(),
            angular_volume: 1.0,
        }
    }

    fn polar(dim: usize, cells: usize) -> Self {
        let h = PI / cells as f64;
        let pow = (dim - 1) as i32;
        let weight = |theta: f64| theta.sin().powi(pow);
        let face = (0..cells)
            .map(|j| weight((j as f64 + 0.5) * h))
            .collect::<Vec<_>>();
        let cell = (0..=cells)
            .map(|j| {
                let a = ((j as f64 - 0.5) * h).max(0.0);
                let b = ((j as f64 + 0.5) * h).min(PI);
                if dim == 2 {
                    a.cos() - b.cos()
                } else {
                    gauss_legendre(a, b, weight)
                }
            })
            .collect::<Vec<_>>();
        let cot = (0..=cells)
            .map(|j| {
                if j == 0 || j == cells {
                    0.0
                } else {
                    let theta = j as f64 * h;
                    theta.cos() / theta.sin()
                }
            })
            .collect();
        Stencil {
            h,
            face,
            cell,
            cot,
            angular_volume: unit_sphere_area(dim - 1),
        }
    }
}

impl ManifoldState {
    /// Flat torus with the given side lengths, sampled along the first one.
    pub fn flat_torus(lengths: Vec<f64>, cells: usize) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::InvalidManifold("torus needs at least one side length".into()));
        }
        if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidManifold(format!("torus side lengths must be positive, got {lengths:?}")));
        }
        check_cells(cells)?;
        Ok(ManifoldState {
            kind: ManifoldKind::FlatTorus,
            dim: lengths.len(),
            cells,
            stencil: Arc::new(Stencil::torus(lengths[0], cells)),
            metric: MetricData::FlatTorus { lengths },
            time: 0.0,
        })
    }

    /// Round `S^n` of squared radius `initial_radius_sq` at `t = 0`.
    pub fn round_sphere(dim: usize, initial_radius_sq: f64, cells: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidManifold(format!("round sphere needs n >= 2, got {dim}")));
        }
        if !(initial_radius_sq.is_finite() && initial_radius_sq > 0.0) {
            return Err(Error::InvalidManifold(format!("r0^2 must be positive, got {initial_radius_sq}")));
        }
        check_cells(cells)?;
        Ok(ManifoldState {
            kind: ManifoldKind::RoundSphere,
            dim,
            cells,
            stencil: Arc::new(Stencil::polar(dim, cells)),
            metric: MetricData::RoundSphere { initial_radius_sq },
            time: 0.0,
        })
    }

    /// Rotationally symmetric surface from its log conformal factor on the
    /// polar nodes `theta_j = j pi / N`.
    pub fn rotsym_surface(log_conformal: Vec<f64>) -> Result<Self> {
        if log_conformal.len() < 2 {
            return Err(Error::InvalidManifold("surface profile needs at least two nodes".into()));
        }
        let cells = log_conformal.len() - 1;
        check_cells(cells)?;
        if let Some(node) = log_conformal.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "log conformal factor", node });
        }
        Ok(ManifoldState {
            kind: ManifoldKind::RotSymSurface,
            dim: 2,
            cells,
            stencil: Arc::new(Stencil::polar(2, cells)),
            metric: MetricData::RotSymSurface { log_conformal },
            time: 0.0,
        })
    }

    /// Surface whose log conformal factor is `phi(theta)`.
    pub fn rotsym_from_fn(cells: usize, phi: impl Fn(f64) -> f64) -> Result<Self> {
        check_cells(cells)?;
        let h = PI / cells as f64;
        Self::rotsym_surface((0..=cells).map(|j| phi(j as f64 * h)).collect())
    }

    /// Same metric data stamped with time `t`. For the round sphere the
    /// radius follows the time stamp.
    pub fn at_time(&self, time: f64) -> Result<Self> {
        if !(time.is_finite() && time >= 0.0) {
            return Err(Error::InvalidParameter(format!("time must be finite and >= 0, got {time}")));
        }
        if let Some(ext) = self.extinction_time() {
            if time >= ext {
                return Err(Error::Extinction { time, extinction: ext });
            }
        }
        let mut next = self.clone();
        next.time = time;
        Ok(next)
    }

    pub(crate) fn with_log_conformal(&self, log_conformal: Vec<f64>, time: f64) -> Self {
        debug_assert_eq!(self.kind, ManifoldKind::RotSymSurface);
        ManifoldState {
            metric: MetricData::RotSymSurface { log_conformal },
            time,
            ..self.clone()
        }
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of grid cells `N`.
    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Number of stored nodes: `N` on the torus, `N + 1` on polar grids.
    pub fn len(&self) -> usize {
        if self.kind.is_polar() {
            self.cells + 1
        } else {
            self.cells
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        self.stencil.h
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn metric(&self) -> &MetricData {
        &self.metric
    }

    pub fn tag(&self) -> GridTag {
        GridTag { kind: self.kind, cells: self.cells }
    }

    /// Reduced coordinate of node `j` (`x` on the torus, `theta` otherwise).
    pub fn coordinate(&self, j: usize) -> f64 {
        j as f64 * self.stencil.h
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.coordinate(j)).collect()
    }

    /// Period of the sampled torus coordinate.
    pub fn period(&self) -> Option<f64> {
        match &self.metric {
            MetricData::FlatTorus { lengths } => Some(lengths[0]),
            _ => None,
        }
    }

    /// `rho^2(t) = r0^2 - 2(n-1) t` for the round sphere.
    pub fn radius_sq(&self) -> Option<f64> {
        match &self.metric {
            MetricData::RoundSphere { initial_radius_sq } => {
                Some(initial_radius_sq - 2.0 * (self.dim as f64 - 1.0) * self.time)
            }
            _ => None,
        }
    }

    /// `r0^2 / (2(n-1))` for the round sphere.
    pub fn extinction_time(&self) -> Option<f64> {
        match &self.metric {
            MetricData::RoundSphere { initial_radius_sq } => {
                Some(initial_radius_sq / (2.0 * (self.dim as f64 - 1.0)))
            }
            _ => None,
        }
    }

    /// Conformal factor `lambda_j` with `g = lambda_j g_0` at node `j`,
    /// where `g_0` is the flat or unit round reference metric.
    pub fn conformal_factor(&self, j: usize) -> f64 {
        match &self.metric {
            MetricData::FlatTorus { .. } => 1.0,
            MetricData::RoundSphere { .. } => self.radius_sq().unwrap_or(f64::NAN),
            MetricData::RotSymSurface { log_conformal } => (2.0 * log_conformal[j]).exp(),
        }
    }

    pub fn conformal_factors(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.conformal_factor(j)).collect()
    }

    /// Warp profile `w(theta_j)` of the polar families (`rho sin theta` on the
    /// sphere, `e^phi sin theta` on the surface).
    pub fn warp(&self) -> Option<Vec<f64>> {
        if !self.kind.is_polar() {
            return None;
        }
        Some(
            (0..self.len())
                .map(|j| {
                    let s = if j == 0 || j == self.cells { 0.0 } else { self.coordinate(j).sin() };
                    self.conformal_factor(j).sqrt() * s
                })
                .collect(),
        )
    }

    /// Wrap a vector of node values as a field on this grid.
    pub fn field(&self, values: Vec<f64>) -> Result<ScalarField> {
        if values.len() != self.len() {
            return Err(Error::GridMismatch { expected: self.len(), found: values.len() });
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "field value", node });
        }
        Ok(ScalarField { values, tag: self.tag() })
    }

    /// Sample `f(coordinate)` at every node.
    pub fn field_from_fn(&self, f: impl Fn(f64) -> f64) -> Result<ScalarField> {
        self.field((0..self.len()).map(|j| f(self.coordinate(j))).collect())
    }

    pub fn constant_field(&self, c: f64) -> Result<ScalarField> {
        self.field(vec![c; self.len()])
    }

    /// Verify that the metric invariants of the family hold.
    pub fn validate(&self) -> Result<()> {
        match &self.metric {
            MetricData::FlatTorus { .. } => Ok(()),
            MetricData::RoundSphere { .. } => {
                let ext = self.extinction_time().unwrap_or(f64::INFINITY);
                if self.time >= ext {
                    Err(Error::Extinction { time: self.time, extinction: ext })
                } else {
                    Ok(())
                }
            }
            MetricData::RotSymSurface { log_conformal } => {
                match log_conformal.iter().position(|x| !x.is_finite()) {
                    Some(node) => Err(Error::PositivityLost { what: "warp profile", node, time: self.time }),
                    None => Ok(()),
                }
            }
        }
    }

    fn check(&self, f: &ScalarField) -> Result<()> {
        if f.tag.kind != self.kind {
            return Err(Error::KindMismatch { expected: self.kind.name(), found: f.tag.kind.name() });
        }
        if f.values.len() != self.len() {
            return Err(Error::GridMismatch { expected: self.len(), found: f.values.len() });
        }
        if let Some(node) = f.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "field value", node });
        }
        Ok(())
    }
}

fn check_cells(cells: usize) -> Result<()> {
    if cells < MIN_CELLS {
        Err(Error::InvalidManifold(format!("grid needs N >= {MIN_CELLS} cells, got {cells}")))
    } else {
        Ok(())
    }
}

/// Real values on the nodes of one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
    tag: GridTag,
}

impl ScalarField {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn tag(&self) -> GridTag {
        self.tag
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, j: usize) -> f64 {
        self.values[j]
    }

    /// Same grid, new values (length is the caller's responsibility).
    pub(crate) fn with_values(&self, values: Vec<f64>) -> ScalarField {
        debug_assert_eq!(values.len(), self.values.len());
        ScalarField { values, tag: self.tag }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField { values: self.values.iter().map(|&x| f(x)).collect(), tag: self.tag }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        if self.tag != other.tag {
            return Err(Error::GridMismatch { expected: self.len(), found: other.len() });
        }
        Ok(ScalarField {
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            tag: self.tag,
        })
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest absolute difference to another field on the same grid.
    pub fn max_abs_diff(&self, other: &ScalarField) -> Result<f64> {
        Ok(self.zip_with(other, |a, b| (a - b).abs())?.max())
    }

    /// Linear interpolation at a reduced coordinate (periodic on the torus,
    /// clamped to `[0, pi]` on polar grids).
    pub fn interpolate(&self, m: &ManifoldState, x: f64) -> f64 {
        let h = m.spacing();
        let n = self.values.len();
        if m.kind.is_polar() {
            let s = (x.clamp(0.0, PI) / h).min((n - 1) as f64);
            let i = (s.floor() as usize).min(n - 2);
            let w = s - i as f64;
            (1.0 - w) * self.values[i] + w * self.values[i + 1]
        } else {
            let period = h * n as f64;
            let s = x.rem_euclid(period) / h;
            let i = (s.floor() as usize) % n;
            let w = s - s.floor();
            (1.0 - w) * self.values[i] + w * self.values[(i + 1) % n]
        }
    }
}

fn polar_derivatives(f: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = f.len() - 1;
    let mut d1 = vec![0.0; n + 1];
    let mut d2 = vec![0.0; n + 1];
    for j in 1..n {
        d1[j] = (f[j + 1] - f[j - 1]) / (2.0 * h);
        d2[j] = (f[j + 1] - 2.0 * f[j] + f[j - 1]) / (h * h);
    }
    // even reflection through the poles
    d2[0] = 2.0 * (f[1] - f[0]) / (h * h);
    d2[n] = 2.0 * (f[n - 1] - f[n]) / (h * h);
    (d1, d2)
}

fn periodic_derivatives(f: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = f.len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for j in 0..n {
        let fp = f[(j + 1) % n];
        let fm = f[(j + n - 1) % n];
        d1[j] = (fp - fm) / (2.0 * h);
        d2[j] = (fp - 2.0 * f[j] + fm) / (h * h);
    }
    (d1, d2)
}

/// First coordinate derivative `f_x` or `f_theta` (zero at the poles).
pub fn coordinate_derivative(f: &ScalarField, m: &ManifoldState) -> Result<ScalarField> {
    m.check(f)?;
    let h = m.spacing();
    let d1 = if m.kind.is_polar() {
        polar_derivatives(&f.values, h).0
    } else {
        periodic_derivatives(&f.values, h).0
    };
    Ok(ScalarField { values: d1, tag: f.tag })
}

/// Flux-form Laplace-Beltrami of the unit reference metric.
fn reference_laplacian(f: &[f64], m: &ManifoldState) -> Vec<f64> {
    let st = &m.stencil;
    let h = st.h;
    if !m.kind.is_polar() {
        return periodic_derivatives(f, h).1;
    }
    let n = m.cells;
    let flux: Vec<f64> = (0..n).map(|j| st.face[j] * (f[j + 1] - f[j]) / h).collect();
    (0..=n)
        .map(|j| {
            let right = if j < n { flux[j] } else { 0.0 };
            let left = if j > 0 { flux[j - 1] } else { 0.0 };
            (right - left) / st.cell[j]
        })
        .collect()
}

/// Discrete Laplace-Beltrami operator of `g(t)`.
pub fn laplacian(f: &ScalarField, m: &ManifoldState) -> Result<ScalarField> {
    m.check(f)?;
    let mut values = reference_laplacian(&f.values, m);
    if m.kind.is_polar() {
        for (j, x) in values.iter_mut().enumerate() {
            *x /= m.conformal_factor(j);
        }
    }
    Ok(ScalarField { values, tag: f.tag })
}

/// `|grad f|^2 = g^{ss} f_s^2`.
pub fn gradient_norm_sq(f: &ScalarField, m: &ManifoldState) -> Result<ScalarField> {
    gradient_dot(f, f, m)
}

/// `<grad f, grad g>` for two symmetric fields.
pub fn gradient_dot(f: &ScalarField, g: &ScalarField, m: &ManifoldState) -> Result<ScalarField> {
    let df = coordinate_derivative(f, m)?;
    let dg = coordinate_derivative(g, m)?;
    let values = (0..m.len())
        .map(|j| df.values[j] * dg.values[j] / m.conformal_factor(j))
        .collect();
    Ok(ScalarField { values, tag: f.tag })
}

/// Hessian of a symmetric field in an orthonormal frame adapted to the
/// symmetry: one radial eigenvalue and one angular eigenvalue repeated
/// `multiplicity = n - 1` times.
#[derive(Clone, Debug)]
pub struct HessianComponents {
    pub radial: Vec<f64>,
    pub angular: Vec<f64>,
    pub multiplicity: usize,
}

impl HessianComponents {
    pub fn trace(&self) -> Vec<f64> {
        let k = self.multiplicity as f64;
        self.radial.iter().zip(&self.angular).map(|(r, a)| r + k * a).collect()
    }

    /// `|Hess f + shift * g|^2` at every node.
    pub fn shifted_norm_sq(&self, shift: &[f64]) -> Vec<f64> {
        let k = self.multiplicity as f64;
        self.radial
            .iter()
            .zip(&self.angular)
            .zip(shift)
            .map(|((r, a), s)| (r + s).powi(2) + k * (a + s).powi(2))
            .collect()
    }
}

pub fn hessian_components(f: &ScalarField, m: &ManifoldState) -> Result<HessianComponents> {
    m.check(f)?;
    let h = m.spacing();
    let multiplicity = m.dim - 1;
    if !m.kind.is_polar() {
        let (_, d2) = periodic_derivatives(&f.values, h);
        let len = d2.len();
        return Ok(HessianComponents { radial: d2, angular: vec![0.0; len], multiplicity });
    }
    let n = m.cells;
    let (d1, d2) = polar_derivatives(&f.values, h);
    let dphi = match &m.metric {
        MetricData::RotSymSurface { log_conformal } => polar_derivatives(log_conformal, h).0,
        _ => vec![0.0; n + 1],
    };
    let mut radial = vec![0.0; n + 1];
    let mut angular = vec![0.0; n + 1];
    for j in 0..=n {
        let lambda = m.conformal_factor(j);
        if j == 0 || j == n {
            radial[j] = d2[j] / lambda;
            angular[j] = d2[j] / lambda;
        } else {
            radial[j] = (d2[j] - dphi[j] * d1[j]) / lambda;
            angular[j] = (m.stencil.cot[j] + dphi[j]) * d1[j] / lambda;
        }
    }
    Ok(HessianComponents { radial, angular, multiplicity })
}

/// Squared Frobenius norm of the Hessian, `|nabla^2 f|^2`.
pub fn hessian_norm_sq(f: &ScalarField, m: &ManifoldState) -> Result<ScalarField> {
    let hc = hessian_components(f, m)?;
    let zero = vec![0.0; m.len()];
    Ok(ScalarField { values: hc.shifted_norm_sq(&zero), tag: f.tag })
}

/// Volume weight of each node; `integrate(f) = sum_j W_j f_j`.
pub fn volume_weights(m: &ManifoldState) -> Vec<f64> {
    let st = &m.stencil;
    match &m.metric {
        MetricData::FlatTorus { lengths } => {
            let transverse: f64 = lengths[1..].iter().product();
            vec![st.h * transverse; m.cells]
        }
        _ => {
            let half_dim = m.dim as f64 / 2.0;
            (0..=m.cells)
                .map(|j| st.angular_volume * m.conformal_factor(j).powf(half_dim) * st.cell[j])
                .collect()
        }
    }
}

/// `int_M f dmu_g`.
pub fn integrate(f: &ScalarField, m: &ManifoldState) -> Result<f64> {
    m.check(f)?;
    Ok(volume_weights(m).iter().zip(&f.values).map(|(w, x)| w * x).sum())
}

/// Scalar curvature: `0` on the torus, `n(n-1)/rho^2` on the sphere and
/// `2 e^{-2 phi} (1 - Delta_0 phi)` on the surface.
pub fn scalar_curvature(m: &ManifoldState) -> ScalarField {
    let values = match &m.metric {
        MetricData::FlatTorus { .. } => vec![0.0; m.len()],
        MetricData::RoundSphere { .. } => {
            let n = m.dim as f64;
            vec![n * (n - 1.0) / m.radius_sq().unwrap_or(f64::NAN); m.len()]
        }
        MetricData::RotSymSurface { log_conformal } => reference_laplacian(log_conformal, m)
            .iter()
            .enumerate()
            .map(|(j, lap)| 2.0 * (1.0 - lap) / m.conformal_factor(j))
            .collect(),
    };
    ScalarField { values, tag: m.tag() }
}

/// Eigenvalue `r` of the Ricci tensor, `Rc = r g` (all model metrics here
/// are pointwise Einstein).
pub fn ricci_eigenvalue(m: &ManifoldState) -> ScalarField {
    let n = m.dim as f64;
    scalar_curvature(m).map(|r| r / n)
}

/// `Rc(grad f, grad f)`.
pub fn ricci_quadratic(f: &ScalarField, m: &ManifoldState) -> Result<ScalarField> {
    ricci_eigenvalue(m).zip_with(&gradient_norm_sq(f, m)?, |r, g| r * g)
}

/// `Rc(grad f, grad g)`.
pub fn ricci_bilinear(f: &ScalarField, g: &ScalarField, m: &ManifoldState) -> Result<ScalarField> {
    ricci_eigenvalue(m).zip_with(&gradient_dot(f, g, m)?, |r, x| r * x)
}

/// `|Rc|^2 = n r^2`.
pub fn ricci_norm_sq(m: &ManifoldState) -> ScalarField {
    let n = m.dim as f64;
    ricci_eigenvalue(m).map(|r| n * r * r)
}

/// `R_ij nabla_i nabla_j f`.
pub fn ricci_hessian(f: &ScalarField, m: &ManifoldState) -> Result<ScalarField> {
    let trace = hessian_components(f, m)?.trace();
    let r = ricci_eigenvalue(m);
    let values = r.values.iter().zip(&trace).map(|(r, t)| r * t).collect();
    Ok(ScalarField { values, tag: m.tag() })
}

/// Distance between two grid nodes within the symmetry class: shortest
/// winding on the torus, meridian arc length on the polar families.
pub fn geodesic_distance(m: &ManifoldState, a: usize, b: usize) -> Result<f64> {
    let len = m.len();
    if a >= len || b >= len {
        return Err(Error::InvalidParameter(format!("node index out of range: {a}, {b} (grid has {len})")));
    }
    let h = m.spacing();
    let (lo, hi) = (a.min(b), a.max(b));
    Ok(match &m.metric {
        MetricData::FlatTorus { .. } => h * ((hi - lo).min(m.cells - (hi - lo))) as f64,
        MetricData::RoundSphere { .. } => m.radius_sq().unwrap_or(f64::NAN).sqrt() * h * (hi - lo) as f64,
        MetricData::RotSymSurface { log_conformal } => (lo..hi)
            .map(|j| 0.5 * h * (log_conformal[j].exp() + log_conformal[j + 1].exp()))
            .sum(),
    })
}

/// Metric coefficient `g_ss` of the reduced coordinate at an arbitrary
/// coordinate value (linear interpolation of the conformal factor).
pub fn radial_metric_at(m: &ManifoldState, x: f64) -> f64 {
    match &m.metric {
        MetricData::FlatTorus { .. } => 1.0,
        MetricData::RoundSphere { .. } => m.radius_sq().unwrap_or(f64::NAN),
        MetricData::RotSymSurface { log_conformal } => {
            let field = ScalarField { values: log_conformal.clone(), tag: m.tag() };
            (2.0 * field.interpolate(m, x)).exp()
        }
    }
}
