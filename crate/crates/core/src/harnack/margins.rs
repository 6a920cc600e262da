use serde::{Deserialize, Serialize};

use super::constants::{kappa, HarnackConstants};
use crate::error::{Error, Result};
use crate::geometry::{gradient_norm_sq, laplacian, scalar_curvature, ManifoldKind, ManifoldState, ScalarField};
use crate::pme::{StoredState, Trajectory};
use crate::ricci_flow::{descent_one_form, lyh_trace_q, scalar_curvature_rates, verify_hypotheses};

/// Default pass threshold of the discrete margins.
pub const TOL_INEQ: f64 = 1e-2;

/// Fraction of the run length excluded at the start.
pub const DEFAULT_T_MIN_FRACTION: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub node: usize,
    pub coordinate: f64,
    pub t: f64,
}

/// Worst case of a margin that should be nonpositive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub estimate: String,
    pub worst_margin: f64,
    pub location: Location,
    pub tolerance: f64,
    pub pass: bool,
    /// False when the trajectory violates the curvature hypotheses; the
    /// margin is then informative only.
    pub valid: bool,
}

impl MarginReport {
    fn build(estimate: String, worst: (f64, Location), tolerance: f64, valid: bool) -> MarginReport {
        let (worst_margin, location) = worst;
        MarginReport { estimate, worst_margin, location, tolerance, pass: valid && worst_margin <= tolerance, valid }
    }
}

/// Two algebraic forms of the Harnack quantity
/// `F = |grad v|^2/v - b v_t/v + c R/v`; the second eliminates `v_t`
/// through the pressure equation.
#[derive(Clone, Debug)]
pub struct HarnackF {
    pub first: ScalarField,
    pub second: ScalarField,
    pub discrepancy: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn harnack_f(
    m: &ManifoldState,
    v: &ScalarField,
    v_t: &ScalarField,
    p: f64,
    a: f64,
    b: f64,
    c: f64,
) -> Result<HarnackF> {
    if let Some(j) = v.values().iter().position(|&x| !(x > 0.0)) {
        return Err(Error::PositivityLost { what: "v", node: j, time: m.time() });
    }
    let grad = gradient_norm_sq(v, m)?;
    let lap = laplacian(v, m)?;
    let r = scalar_curvature(m);
    let mut first = Vec::with_capacity(m.len());
    let mut second = Vec::with_capacity(m.len());
    for j in 0..m.len() {
        let (vj, g, rj) = (v.get(j), grad.get(j), r.get(j));
        first.push(g / vj - b * v_t.get(j) / vj + c * rj / vj);
        second.push(-b * (p - 1.0) * lap.get(j) + (1.0 - b) * g / vj - a * b * (p - 1.0) * rj + c * rj / vj);
    }
    let first = m.field(first)?;
    let second = m.field(second)?;
    let discrepancy = first.max_abs_diff(&second)?;
    Ok(HarnackF { first, second, discrepancy })
}

/// `max R` over every stored state.
pub fn r_max(traj: &Trajectory) -> f64 {
    traj.states.iter().map(|s| scalar_curvature(&s.manifold).max()).fold(f64::NEG_INFINITY, f64::max)
}

/// `|grad v|^2/v - b v_t/v - (b-1) R/v - d/t - C0 |b-2| R_max` at one stored
/// state, with `t` the elapsed time.
pub fn margin_field(s: &StoredState, t0: f64, consts: &HarnackConstants, r_max: f64) -> Result<ScalarField> {
    let m = &s.manifold;
    let elapsed = s.time() - t0;
    let grad = gradient_norm_sq(&s.v, m)?;
    let r = scalar_curvature(m);
    let b = consts.b;
    let shift = consts.d / elapsed + consts.curvature_coefficient() * r_max;
    let values = (0..m.len())
        .map(|j| {
            let v = s.v.get(j);
            grad.get(j) / v - b * s.v_t.get(j) / v - (b - 1.0) * r.get(j) / v - shift
        })
        .collect();
    m.field(values)
}

fn worst_over<'a>(
    states: impl Iterator<Item = &'a StoredState>,
    mut field: impl FnMut(&StoredState) -> Result<ScalarField>,
) -> Result<(f64, Location)> {
    let mut worst = (f64::NEG_INFINITY, Location { node: 0, coordinate: 0.0, t: f64::NAN });
    for s in states {
        let f = field(s)?;
        for (j, &x) in f.values().iter().enumerate() {
            if x > worst.0 {
                worst = (x, Location { node: j, coordinate: s.manifold.coordinate(j), t: s.time() });
            }
        }
    }
    if worst.0 == f64::NEG_INFINITY {
        return Err(Error::TrajectoryTooShort { needed: 1, found: 0 });
    }
    Ok(worst)
}

/// `t_min` for a trajectory: the default fraction of its length.
pub fn default_t_min(traj: &Trajectory) -> f64 {
    DEFAULT_T_MIN_FRACTION * (traj.last().time() - traj.t0)
}

fn hypotheses_hold(traj: &Trajectory) -> Result<bool> {
    Ok(verify_hypotheses(&traj.manifolds())?.satisfied())
}

/// Worst margin of a global estimate over all nodes and stored times with
/// elapsed time at least `t_min`.
pub fn theorem_margin(traj: &Trajectory, consts: &HarnackConstants, t_min: f64, tol: f64) -> Result<MarginReport> {
    if !(t_min > 0.0) {
        return Err(Error::InvalidParameter(format!("t_min must be positive, got {t_min}")));
    }
    let valid = hypotheses_hold(traj)?;
    let rmax = r_max(traj);
    let states = traj.states.iter().filter(|s| s.time() - traj.t0 >= t_min * (1.0 - 1e-12));
    let worst = worst_over(states, |s| margin_field(s, traj.t0, consts, rmax))?;
    let estimate = format!("{}_b{}", consts.variant.name(), consts.b);
    Ok(MarginReport::build(estimate, worst, tol, valid))
}

/// Worst margin at every stored time; `None` at the initial time.
pub fn margin_series(traj: &Trajectory, consts: &HarnackConstants) -> Result<Vec<Option<f64>>> {
    let rmax = r_max(traj);
    traj.states
        .iter()
        .map(|s| {
            if s.time() - traj.t0 <= 0.0 {
                Ok(None)
            } else {
                Ok(Some(margin_field(s, traj.t0, consts, rmax)?.max()))
            }
        })
        .collect()
}

/// Outcome of the refinement clause for a positive margin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Refinement {
    /// Coarse margin already nonpositive.
    NotNeeded,
    /// The positive overshoot shrank at least threefold.
    Discretization,
    Violation,
}

pub fn attribute_refinement(coarse: &MarginReport, fine: &MarginReport) -> Refinement {
    if coarse.worst_margin <= 0.0 {
        Refinement::NotNeeded
    } else if fine.worst_margin <= coarse.worst_margin / 3.0 {
        Refinement::Discretization
    } else {
        Refinement::Violation
    }
}

/// Flat-space estimate `alpha v_t/v - |grad v|^2/v >= -(p-1) kappa alpha^2 / t`
/// for `alpha > 1` on a static torus; the margin is the negated slack.
pub fn lnvv_check(traj: &Trajectory, alpha: f64, t_min: f64, tol: f64) -> Result<MarginReport> {
    if traj.kind() != ManifoldKind::FlatTorus {
        return Err(Error::InvalidParameter("the flat-space estimate needs a static torus".into()));
    }
    if !(alpha > 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must exceed 1, got {alpha}")));
    }
    let k = kappa(traj.dim(), traj.p);
    let p = traj.p;
    let t0 = traj.t0;
    let states = traj.states.iter().filter(|s| s.time() - t0 >= t_min * (1.0 - 1e-12));
    let worst = worst_over(states, |s| {
        let grad = gradient_norm_sq(&s.v, &s.manifold)?;
        let barrier = (p - 1.0) * k * alpha * alpha / (s.time() - t0);
        let values = (0..s.v.len())
            .map(|j| {
                let v = s.v.get(j);
                -(alpha * s.v_t.get(j) / v - grad.get(j) / v + barrier)
            })
            .collect();
        s.manifold.field(values)
    })?;
    Ok(MarginReport::build(format!("flat_alpha{alpha}"), worst, tol, true))
}

/// Trace quantity of the curvature along `V = -grad v`, checked for
/// nonnegativity at interior stored times; margin is `-min Q`.
pub fn lyh_check(traj: &Trajectory, tol: f64) -> Result<MarginReport> {
    let manifolds = traj.manifolds();
    let valid = verify_hypotheses(&manifolds)?.satisfied();
    let rates = scalar_curvature_rates(&manifolds)?;
    let last = traj.len() - 1;
    let interior: Vec<usize> = (1..last).filter(|&k| traj.states[k].time() > traj.t0).collect();
    let mut it = interior.iter();
    let worst = worst_over(interior.iter().map(|&k| &traj.states[k]), |s| {
        let k = *it.next().expect("one index per state");
        let form = descent_one_form(&s.v, &s.manifold)?;
        Ok(lyh_trace_q(&s.manifold, &form, s.time() - traj.t0, Some(&rates[k]))?.map(|q| -q))
    })?;
    Ok(MarginReport::build("lyh_trace".into(), worst, tol, valid))
}
