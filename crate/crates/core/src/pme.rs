//! Method-of-lines solver for the forced porous medium equation
//! `u_t = Delta_{g(t)} u^p + a R u` on a metric evolving by Ricci flow.
//!
//! Time stepping is classical RK4. Each stage sees the metric at its own
//! stage time (closed form on the torus and the sphere, the matching RK4
//! stage of the conformal flow on the surface). A macro step `dt` is split
//! into equal substeps chosen from the CFL limit at the start of the step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    gradient_norm_sq, integrate, laplacian, scalar_curvature, ManifoldKind, ManifoldState, ScalarField,
};
use crate::ricci_flow::{metric_cfl_limit, stage_metrics, time_derivatives, StageMetrics, DEFAULT_CFL};

/// Substeps are sized to this fraction of the CFL limit.
const SUBSTEP_HEADROOM: f64 = 0.8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    Constant { value: f64 },
    /// `base + amplitude * cos(mode * x)`, with `x` the polar angle or the
    /// torus coordinate rescaled to `[0, 2 pi)`.
    CosineBump { base: f64, amplitude: f64, mode: u32 },
    /// Nodal values.
    Tabulated { values: Vec<f64> },
}

impl InitialData {
    pub fn sample(&self, m: &ManifoldState) -> Result<ScalarField> {
        let u = match self {
            InitialData::Constant { value } => m.constant_field(*value)?,
            InitialData::CosineBump { base, amplitude, mode } => {
                if amplitude.abs() >= *base {
                    return Err(Error::InvalidParameter(format!(
                        "cosine bump needs |amplitude| < base, got {amplitude} and {base}"
                    )));
                }
                let scale = match m.period() {
                    Some(l) => 2.0 * std::f64::consts::PI / l,
                    None => 1.0,
                };
                let k = *mode as f64;
                m.field_from_fn(|x| base + amplitude * (k * scale * x).cos())?
            }
            InitialData::Tabulated { values } => m.field(values.clone())?,
        };
        if let Some(j) = u.values().iter().position(|&x| x <= 0.0) {
            return Err(Error::PositivityLost { what: "initial data", node: j, time: m.time() });
        }
        Ok(u)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PmeParams {
    pub p: f64,
    /// Coefficient of the curvature forcing; `1` conserves mass.
    pub a: f64,
    pub initial: InitialData,
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub store_every: usize,
    pub c_cfl: f64,
}

impl PmeParams {
    pub fn new(p: f64, initial: InitialData, t_end: f64, dt: f64) -> Self {
        PmeParams { p, a: 1.0, initial, t0: 0.0, t_end, dt, store_every: 1, c_cfl: DEFAULT_CFL }
    }

    pub fn with_store_every(mut self, k: usize) -> Self {
        self.store_every = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.p > 1.0 && self.p.is_finite()) {
            return bad(format!("p must exceed 1, got {}", self.p));
        }
        if !self.a.is_finite() {
            return bad(format!("forcing coefficient must be finite, got {}", self.a));
        }
        if !(self.t0.is_finite() && self.t_end.is_finite() && self.t_end > self.t0) {
            return bad(format!("need t0 < T, got [{}, {}]", self.t0, self.t_end));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.store_every == 0 {
            return bad("store_every must be at least 1".into());
        }
        if !(self.c_cfl > 0.0 && self.c_cfl <= 1.0) {
            return bad(format!("c_cfl must lie in (0, 1], got {}", self.c_cfl));
        }
        let steps = self.macro_steps();
        let span = self.t_end - self.t0;
        if steps == 0 || (steps as f64 * self.dt - span).abs() > 1e-9 * span {
            return bad(format!("dt = {} does not divide the window length {span}", self.dt));
        }
        if !steps.is_multiple_of(self.store_every) {
            return bad(format!("store_every = {} does not divide the {steps} steps", self.store_every));
        }
        Ok(())
    }

    pub fn macro_steps(&self) -> usize {
        ((self.t_end - self.t0) / self.dt).round() as usize
    }

    pub fn stored_count(&self) -> usize {
        self.macro_steps() / self.store_every + 1
    }
}

/// `v = p/(p-1) u^{p-1}`.
pub fn pressure(u: &ScalarField, p: f64) -> Result<ScalarField> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    if let Some(j) = u.values().iter().position(|&x| !(x > 0.0)) {
        return Err(Error::PositivityLost { what: "u", node: j, time: f64::NAN });
    }
    let c = p / (p - 1.0);
    Ok(u.map(|x| c * x.powf(p - 1.0)))
}

/// `(p-1) v Delta v + |grad v|^2 + a (p-1) R v`.
pub fn pressure_rhs(v: &ScalarField, m: &ManifoldState, p: f64, a: f64) -> Result<ScalarField> {
    let lap = laplacian(v, m)?;
    let grad = gradient_norm_sq(v, m)?;
    let r = scalar_curvature(m);
    let values = (0..m.len())
        .map(|j| {
            let vj = v.get(j);
            (p - 1.0) * vj * lap.get(j) + grad.get(j) + a * (p - 1.0) * r.get(j) * vj
        })
        .collect();
    m.field(values)
}

/// `Delta u^p + a R u`.
pub fn forced_rhs(u: &ScalarField, m: &ManifoldState, p: f64, a: f64) -> Result<ScalarField> {
    let lap = laplacian(&u.map(|x| x.powf(p)), m)?;
    let r = scalar_curvature(m);
    m.field((0..m.len()).map(|j| lap.get(j) + a * r.get(j) * u.get(j)).collect())
}

/// Largest stable step of the diffusion at state `(u, m)`.
pub fn pme_cfl_limit(u: &ScalarField, m: &ManifoldState, p: f64, c_cfl: f64) -> f64 {
    let stiffness = (0..m.len())
        .map(|j| p * u.get(j).powf(p - 1.0) / m.conformal_factor(j))
        .fold(0.0, f64::max);
    if stiffness == 0.0 {
        f64::INFINITY
    } else {
        c_cfl * m.spacing().powi(2) / stiffness
    }
}

/// Extra forcing `S(x, t)` evaluated on a stage metric.
pub type Source<'a> = dyn Fn(&ManifoldState) -> Result<ScalarField> + 'a;

fn stage_rhs(u: &ScalarField, m: &ManifoldState, p: f64, a: f64, source: Option<&Source>) -> Result<ScalarField> {
    let f = forced_rhs(u, m, p, a)?;
    match source {
        Some(s) => f.zip_with(&s(m)?, |x, y| x + y),
        None => Ok(f),
    }
}

fn positive_combination(u: &ScalarField, scale: f64, k: &ScalarField, time: f64) -> Result<ScalarField> {
    let out = u.zip_with(k, |x, y| x + scale * y)?;
    if let Some(j) = out.values().iter().position(|&x| !(x > 0.0)) {
        return Err(Error::PositivityLost { what: "u", node: j, time });
    }
    Ok(out)
}

fn rk4(
    u: &ScalarField,
    stages: &StageMetrics,
    p: f64,
    a: f64,
    source: Option<&Source>,
) -> Result<ScalarField> {
    let [s1, s2, s3, s4] = &stages.stages;
    let dt = stages.next.time() - s1.time();
    let k1 = stage_rhs(u, s1, p, a, source)?;
    let u2 = positive_combination(u, 0.5 * dt, &k1, s2.time())?;
    let k2 = stage_rhs(&u2, s2, p, a, source)?;
    let u3 = positive_combination(u, 0.5 * dt, &k2, s3.time())?;
    let k3 = stage_rhs(&u3, s3, p, a, source)?;
    let u4 = positive_combination(u, dt, &k3, s4.time())?;
    let k4 = stage_rhs(&u4, s4, p, a, source)?;
    let incr: Vec<f64> = (0..u.len())
        .map(|j| (k1.get(j) + 2.0 * k2.get(j) + 2.0 * k3.get(j) + k4.get(j)) / 6.0)
        .collect();
    positive_combination(u, dt, &u.with_values(incr), stages.next.time())
}

fn check_cfl(u: &ScalarField, m: &ManifoldState, p: f64, c_cfl: f64, dt: f64) -> Result<()> {
    let limit = pme_cfl_limit(u, m, p, c_cfl).min(metric_cfl_limit(m, c_cfl));
    if dt > limit {
        Err(Error::Cfl { dt, limit })
    } else {
        Ok(())
    }
}

/// One RK4 step from `(u, m)` to the time of `m_next`. `m_next` must be the
/// flowed metric; no substepping is done.
pub fn step(u: &ScalarField, m: &ManifoldState, m_next: &ManifoldState, params: &PmeParams) -> Result<ScalarField> {
    step_with_source(u, m, m_next, params, None)
}

pub fn step_with_source(
    u: &ScalarField,
    m: &ManifoldState,
    m_next: &ManifoldState,
    params: &PmeParams,
    source: Option<&Source>,
) -> Result<ScalarField> {
    if m_next.kind() != m.kind() || m_next.len() != m.len() {
        return Err(Error::MetricMismatch("next metric lives on a different grid".into()));
    }
    let dt = m_next.time() - m.time();
    check_cfl(u, m, params.p, params.c_cfl, dt)?;
    let stages = stage_metrics(m, m_next.time(), params.c_cfl)?;
    let scale = stages.next.conformal_factors().iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let drift = stages
        .next
        .conformal_factors()
        .iter()
        .zip(m_next.conformal_factors())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()));
    if drift > 1e-12 * scale {
        return Err(Error::MetricMismatch(format!(
            "next metric differs from the flowed metric by {drift:e}"
        )));
    }
    rk4(u, &stages, params.p, params.a, source)
}

/// One stored time of a solution.
#[derive(Clone, Debug)]
pub struct StoredState {
    pub manifold: ManifoldState,
    pub u: ScalarField,
    pub v: ScalarField,
    /// Second-order time difference of the stored pressures.
    pub v_t: ScalarField,
}

impl StoredState {
    pub fn time(&self) -> f64 {
        self.manifold.time()
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub p: f64,
    pub a: f64,
    pub t0: f64,
    pub states: Vec<StoredState>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(StoredState::time).collect()
    }

    pub fn manifolds(&self) -> Vec<ManifoldState> {
        self.states.iter().map(|s| s.manifold.clone()).collect()
    }

    pub fn kind(&self) -> ManifoldKind {
        self.states[0].manifold.kind()
    }

    pub fn dim(&self) -> usize {
        self.states[0].manifold.dim()
    }

    /// Stored spacing in time.
    pub fn stored_dt(&self) -> f64 {
        let t = self.times();
        (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64
    }

    pub fn last(&self) -> &StoredState {
        self.states.last().expect("trajectory is never empty")
    }
}

fn assemble(p: f64, a: f64, t0: f64, manifolds: Vec<ManifoldState>, us: Vec<ScalarField>) -> Result<Trajectory> {
    let vs = us.iter().map(|u| pressure(u, p)).collect::<Result<Vec<_>>>()?;
    let times: Vec<f64> = manifolds.iter().map(ManifoldState::time).collect();
    let vts = time_derivatives(&vs, &times)?;
    let states = manifolds
        .into_iter()
        .zip(us)
        .zip(vs)
        .zip(vts)
        .map(|(((manifold, u), v), v_t)| StoredState { manifold, u, v, v_t })
        .collect();
    Ok(Trajectory { p, a, t0, states })
}

fn start_state(m0: &ManifoldState, t0: f64) -> Result<ManifoldState> {
    match m0.kind() {
        ManifoldKind::RotSymSurface => {
            let phi = match m0.metric() {
                crate::geometry::MetricData::RotSymSurface { log_conformal } => log_conformal.clone(),
                _ => unreachable!(),
            };
            Ok(m0.with_log_conformal(phi, t0))
        }
        _ => m0.at_time(t0),
    }
}

/// Solve over `[t0, T]`. The sphere is placed at its flowed radius at `t0`;
/// the surface profile is taken as the metric at `t0`.
pub fn run(params: &PmeParams, m0: &ManifoldState) -> Result<Trajectory> {
    run_with_source(params, m0, None)
}

pub fn run_with_source(params: &PmeParams, m0: &ManifoldState, source: Option<&Source>) -> Result<Trajectory> {
    params.validate()?;
    if let Some(ext) = m0.extinction_time() {
        if params.t_end >= ext {
            return Err(Error::Extinction { time: params.t_end, extinction: ext });
        }
    }
    if params.stored_count() < 3 {
        return Err(Error::TrajectoryTooShort { needed: 3, found: params.stored_count() });
    }
    let mut m = start_state(m0, params.t0)?;
    let mut u = params.initial.sample(&m)?;
    let mut manifolds = vec![m.clone()];
    let mut us = vec![u.clone()];
    let steps = params.macro_steps();
    let (p, a, c) = (params.p, params.a, params.c_cfl);
    for k in 1..=steps {
        let t_start = params.t0 + (k - 1) as f64 * params.dt;
        let t_target = params.t0 + k as f64 * params.dt;
        let limit = pme_cfl_limit(&u, &m, p, c).min(metric_cfl_limit(&m, c));
        let sub = ((params.dt / (SUBSTEP_HEADROOM * limit)).ceil() as usize).max(1);
        let h = params.dt / sub as f64;
        for s in 1..=sub {
            let t_next = if s == sub { t_target } else { t_start + s as f64 * h };
            check_cfl(&u, &m, p, c, t_next - m.time())?;
            let stages = stage_metrics(&m, t_next, c)?;
            u = rk4(&u, &stages, p, a, source)?;
            m = stages.next;
        }
        if k % params.store_every == 0 {
            manifolds.push(m.clone());
            us.push(u.clone());
        }
    }
    assemble(p, a, params.t0, manifolds, us)
}

/// `(t, int u dmu_{g(t)})` at every stored time.
pub fn mass(traj: &Trajectory) -> Result<Vec<(f64, f64)>> {
    traj.states.iter().map(|s| Ok((s.time(), integrate(&s.u, &s.manifold)?))).collect()
}

/// `max_t |mass(t) / mass(t0) - 1|`.
pub fn max_relative_mass_drift(traj: &Trajectory) -> Result<f64> {
    let masses = mass(traj)?;
    let m0 = masses[0].1;
    Ok(masses.iter().map(|(_, m)| (m / m0 - 1.0).abs()).fold(0.0, f64::max))
}

/// Largest `|v_t - ((p-1) v Delta v + |grad v|^2 + a (p-1) R v)|` over the
/// interior stored times.
pub fn pressure_consistency(traj: &Trajectory) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in &traj.states[1..traj.len() - 1] {
        let rhs = pressure_rhs(&s.v, &s.manifold, traj.p, traj.a)?;
        worst = worst.max(rhs.max_abs_diff(&s.v_t)?);
    }
    Ok(worst)
}

/// A smooth positive solution of `u_t = Delta u^p + a R u + S` with the
/// source known in closed form.
pub trait ExactSolution: Sync {
    fn value(&self, m: &ManifoldState, x: f64) -> f64;
    fn source(&self, m: &ManifoldState, x: f64, p: f64, a: f64) -> f64;
}

/// `base + amplitude * cos(k x) e^{-rate t}` on a static flat torus of
/// period `2 pi / k`.
#[derive(Clone, Copy, Debug)]
pub struct DecayingCosine {
    pub base: f64,
    pub amplitude: f64,
    pub wavenumber: f64,
    pub rate: f64,
}

impl ExactSolution for DecayingCosine {
    fn value(&self, m: &ManifoldState, x: f64) -> f64 {
        self.base + self.amplitude * (self.wavenumber * x).cos() * (-self.rate * m.time()).exp()
    }

    fn source(&self, m: &ManifoldState, x: f64, p: f64, _a: f64) -> f64 {
        let k = self.wavenumber;
        let e = self.amplitude * (-self.rate * m.time()).exp();
        let u = self.base + e * (k * x).cos();
        let u_t = -self.rate * e * (k * x).cos();
        let u_x = -k * e * (k * x).sin();
        let u_xx = -k * k * e * (k * x).cos();
        let lap_up = p * u.powf(p - 1.0) * u_xx + p * (p - 1.0) * u.powf(p - 2.0) * u_x * u_x;
        u_t - lap_up
    }
}

/// Spatially constant solution on the round sphere (or torus):
/// `u0 (rho^2(t) / r0^2)^{-a n / 2}`, no source.
#[derive(Clone, Copy, Debug)]
pub struct HomogeneousSolution {
    pub u0: f64,
}

impl ExactSolution for HomogeneousSolution {
    fn value(&self, m: &ManifoldState, _x: f64) -> f64 {
        match (m.radius_sq(), m.metric()) {
            (Some(rho2), crate::geometry::MetricData::RoundSphere { initial_radius_sq }) => {
                self.u0 * (rho2 / initial_radius_sq).powf(-(m.dim() as f64) / 2.0)
            }
            _ => self.u0,
        }
    }

    fn source(&self, _m: &ManifoldState, _x: f64, _p: f64, _a: f64) -> f64 {
        0.0
    }
}

#[derive(Clone, Debug)]
pub struct ManufacturedReport {
    pub trajectory: Trajectory,
    /// `max |u - u*|` over all stored states and nodes.
    pub max_error: f64,
    pub max_relative_error: f64,
}

/// Run with the source of `exact` and measure the error at stored times.
/// The initial data are replaced by the exact solution at `t0`.
pub fn manufactured_run(params: &PmeParams, m0: &ManifoldState, exact: &dyn ExactSolution) -> Result<ManufacturedReport> {
    let start = start_state(m0, params.t0)?;
    let initial = InitialData::Tabulated { values: start.coordinates().iter().map(|&x| exact.value(&start, x)).collect() };
    let params = PmeParams { initial, ..params.clone() };
    let (p, a) = (params.p, params.a);
    let source = |m: &ManifoldState| m.field(m.coordinates().iter().map(|&x| exact.source(m, x, p, a)).collect());
    let trajectory = run_with_source(&params, m0, Some(&source))?;
    let mut max_error: f64 = 0.0;
    let mut max_relative_error: f64 = 0.0;
    for s in &trajectory.states {
        for (j, x) in s.manifold.coordinates().into_iter().enumerate() {
            let want = exact.value(&s.manifold, x);
            let err = (s.u.get(j) - want).abs();
            max_error = max_error.max(err);
            max_relative_error = max_relative_error.max(err / want.abs());
        }
    }
    Ok(ManufacturedReport { trajectory, max_error, max_relative_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn torus(n: usize) -> ManifoldState {
        ManifoldState::flat_torus(vec![2.0 * PI], n).unwrap()
    }

    #[test]
    fn pressure_examples() {
        let m = torus(16);
        let v = pressure(&m.constant_field(1.0).unwrap(), 2.0).unwrap();
        assert!(v.values().iter().all(|&x| x == 2.0));
        let v = pressure(&m.constant_field(4.0).unwrap(), 2.0).unwrap();
        assert!(v.values().iter().all(|&x| x == 8.0));
        let v = pressure(&m.constant_field(1.0).unwrap(), 3.0).unwrap();
        assert!(v.values().iter().all(|&x| x == 1.5));
        assert!(pressure(&m.constant_field(0.0).unwrap(), 2.0).is_err());
        assert!(pressure(&m.constant_field(1.0).unwrap(), 1.0).is_err());
    }

    #[test]
    fn constant_on_torus_is_steady() {
        let m = torus(32);
        let params = PmeParams::new(2.0, InitialData::Constant { value: 1.3 }, 0.1, 0.01);
        let u = m.constant_field(1.3).unwrap();
        let next = m.at_time(0.001).unwrap();
        assert_eq!(step(&u, &m, &next, &params).unwrap(), u);
        let traj = run(&params, &m).unwrap();
        assert!(traj.states.iter().all(|s| s.u == u));
        assert_eq!(max_relative_mass_drift(&traj).unwrap(), 0.0);
    }

    #[test]
    fn homogeneous_sphere_matches_ode() {
        let m = ManifoldState::round_sphere(2, 1.0, 32).unwrap();
        let params = PmeParams::new(2.0, InitialData::Constant { value: 1.0 }, 0.2, 1e-3).with_store_every(20);
        let traj = run(&params, &m).unwrap();
        for s in &traj.states {
            let want = 1.0 / (1.0 - 2.0 * s.time());
            assert!((s.u.get(5) / want - 1.0).abs() < 1e-10);
        }
        assert!(max_relative_mass_drift(&traj).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_bad_params() {
        let m = ManifoldState::round_sphere(2, 1.0, 32).unwrap();
        let params = PmeParams::new(2.0, InitialData::Constant { value: 1.0 }, 0.6, 1e-2);
        assert!(matches!(run(&params, &m), Err(Error::Extinction { .. })));
        let params = PmeParams::new(2.0, InitialData::Constant { value: 1.0 }, 0.1, 0.03);
        assert!(run(&params, &m).is_err());
        let params = PmeParams::new(0.5, InitialData::Constant { value: 1.0 }, 0.1, 0.01);
        assert!(params.validate().is_err());
        let bump = InitialData::CosineBump { base: 1.0, amplitude: 1.0, mode: 1 };
        assert!(bump.sample(&m).is_err());
    }

    #[test]
    fn explicit_step_enforces_cfl() {
        let m = torus(64);
        let params = PmeParams::new(2.0, InitialData::Constant { value: 1.0 }, 0.1, 0.01);
        let u = m.field_from_fn(|x| 1.0 + 0.1 * x.cos()).unwrap();
        let next = m.at_time(0.05).unwrap();
        assert!(matches!(step(&u, &m, &next, &params), Err(Error::Cfl { .. })));
    }

    #[test]
    fn rejects_foreign_next_metric() {
        let m = ManifoldState::round_sphere(2, 1.0, 32).unwrap();
        let other = ManifoldState::round_sphere(2, 2.0, 32).unwrap().at_time(1e-5).unwrap();
        let params = PmeParams::new(2.0, InitialData::Constant { value: 1.0 }, 0.1, 0.01);
        let u = m.constant_field(1.0).unwrap();
        assert!(matches!(step(&u, &m, &other, &params), Err(Error::MetricMismatch(_))));
    }

    #[test]
    fn bump_spreads_and_keeps_mass() {
        let m = torus(64);
        let params = PmeParams::new(2.0, InitialData::CosineBump { base: 1.0, amplitude: 0.1, mode: 1 }, 0.5, 0.01)
            .with_store_every(5);
        let traj = run(&params, &m).unwrap();
        for w in traj.states.windows(2) {
            assert!(w[1].u.max() < w[0].u.max());
            assert!(w[1].u.min() > w[0].u.min());
        }
        assert!(max_relative_mass_drift(&traj).unwrap() < 1e-12);
        assert!(pressure_consistency(&traj).unwrap() < 1e-2);
    }

    #[test]
    fn constant_manufactured_solution_is_exact() {
        let m = torus(32);
        let exact = HomogeneousSolution { u0: 2.0 };
        let params = PmeParams::new(2.0, InitialData::Constant { value: 2.0 }, 0.1, 0.01);
        let rep = manufactured_run(&params, &m, &exact).unwrap();
        assert_eq!(rep.max_error, 0.0);
    }
}
