//! Integrated Harnack inequalities along space-time curves.
//!
//! Curves are piecewise linear in `(x, t)`, where `x` is the reduced
//! coordinate (unwrapped on the torus, the polar angle otherwise). Both
//! endpoints sit on grid nodes at stored times, so `v` there is read off the
//! trajectory without interpolation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::constants::HarnackConstants;
use super::margins::{r_max, Location, MarginReport};
use crate::error::{Error, Result};
use crate::geometry::{
    geodesic_distance, radial_metric_at, scalar_curvature, ManifoldKind, ManifoldState, MetricData, ScalarField,
};
use crate::pme::Trajectory;

/// Slack threshold of the per-curve checks.
pub const PATH_TOLERANCE: f64 = 1e-6;

/// Simpson panels per curve segment.
const PANELS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathForm {
    Multiplicative,
    Additive,
}

/// Grid node at a stored time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchor {
    pub node: usize,
    pub state: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeCurve {
    pub start: Anchor,
    pub end: Anchor,
    /// All knots `(x, t)` including both endpoints, times increasing.
    pub knots: Vec<(f64, f64)>,
}

impl SpaceTimeCurve {
    /// Curve through `interior` knots. On the torus the end knot is placed
    /// at the unwrapped copy of its node nearest to the previous knot.
    pub fn new(traj: &Trajectory, start: Anchor, end: Anchor, interior: &[(f64, f64)]) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidCurve(msg));
        if start.state >= end.state || end.state >= traj.len() {
            return bad(format!("stored indices must satisfy k1 < k2 < {}, got {} and {}", traj.len(), start.state, end.state));
        }
        let m = &traj.states[0].manifold;
        if start.node >= m.len() || end.node >= m.len() {
            return bad(format!("node index out of range (grid has {} nodes)", m.len()));
        }
        let t1 = traj.states[start.state].time();
        let t2 = traj.states[end.state].time();
        if !(t1 > traj.t0) {
            return bad(format!("curve must start after t0 = {}, got t1 = {t1}", traj.t0));
        }
        let mut knots = vec![(m.coordinate(start.node), t1)];
        for &(x, t) in interior {
            if !(t > knots.last().map_or(t1, |k| k.1) && t < t2) {
                return bad(format!("interior knot times must increase strictly inside ({t1}, {t2}), got {t}"));
            }
            if m.kind().is_polar() && !(0.0..=std::f64::consts::PI).contains(&x) {
                return bad(format!("polar coordinate {x} outside [0, pi]"));
            }
            if !x.is_finite() {
                return bad("non-finite knot".into());
            }
            knots.push((x, t));
        }
        let mut x2 = m.coordinate(end.node);
        if let Some(period) = m.period() {
            let prev = knots.last().expect("start knot").0;
            x2 += ((prev - x2) / period).round() * period;
        }
        knots.push((x2, t2));
        Ok(SpaceTimeCurve { start, end, knots })
    }

    /// The curve that stays at one node.
    pub fn constant(traj: &Trajectory, node: usize, k1: usize, k2: usize) -> Result<Self> {
        Self::new(traj, Anchor { node, state: k1 }, Anchor { node, state: k2 }, &[])
    }

    /// Constant-speed minimizing path of `g(t1)` between two nodes. On the
    /// surface the speed is made constant by placing one knot per grid
    /// node, timed by the arclength fraction.
    pub fn geodesic(traj: &Trajectory, start: Anchor, end: Anchor) -> Result<Self> {
        let base = Self::new(traj, start, end, &[])?;
        let m = &traj.states[start.state].manifold;
        if m.kind() != ManifoldKind::RotSymSurface || start.node.abs_diff(end.node) < 2 {
            return Ok(base);
        }
        let (t1, t2) = (base.knots[0].1, base.knots[1].1);
        let total = geodesic_distance(m, start.node, end.node)?;
        let step: isize = if end.node > start.node { 1 } else { -1 };
        let mut interior = Vec::new();
        let mut j = start.node as isize + step;
        while j != end.node as isize {
            let s = geodesic_distance(m, start.node, j as usize)?;
            interior.push((m.coordinate(j as usize), t1 + (t2 - t1) * s / total));
            j += step;
        }
        Self::new(traj, start, end, &interior)
    }

    /// Seeded random curve: endpoints uniform among nodes and among stored
    /// times with elapsed time at least `t_min`, up to three interior knots.
    pub fn random(traj: &Trajectory, seed: u64, index: u64, t_min: f64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let eligible: Vec<usize> =
            (0..traj.len()).filter(|&k| traj.states[k].time() - traj.t0 >= t_min.max(f64::MIN_POSITIVE)).collect();
        if eligible.len() < 2 {
            return Err(Error::TrajectoryTooShort { needed: 2, found: eligible.len() });
        }
        let a = rng.gen_range(0..eligible.len() - 1);
        let b = rng.gen_range(a + 1..eligible.len());
        let (k1, k2) = (eligible[a], eligible[b]);
        let m = &traj.states[k1].manifold;
        let nodes = m.len();
        let start = Anchor { node: rng.gen_range(0..nodes), state: k1 };
        let end = Anchor { node: rng.gen_range(0..nodes), state: k2 };
        let (t1, t2) = (traj.states[k1].time(), traj.states[k2].time());
        let count = rng.gen_range(0..=3usize);
        let mut times: Vec<f64> = (0..count).map(|_| rng.gen_range(t1..t2)).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let x1 = m.coordinate(start.node);
        let interior: Vec<(f64, f64)> = times
            .into_iter()
            .filter(|&t| t > t1 && t < t2)
            .map(|t| {
                let x = match m.period() {
                    Some(l) => x1 + rng.gen_range(-l..l),
                    None => rng.gen_range(0.0..=std::f64::consts::PI),
                };
                (x, t)
            })
            .collect();
        Self::new(traj, start, end, &interior)
    }

    pub fn t1(&self) -> f64 {
        self.knots[0].1
    }

    pub fn t2(&self) -> f64 {
        self.knots[self.knots.len() - 1].1
    }
}

/// `R` and the metric coefficient `g_xx` at arbitrary `(x, t)`.
enum Sampler<'a> {
    Torus,
    Sphere(&'a ManifoldState),
    Surface { traj: &'a Trajectory, curvature: Vec<ScalarField>, phi: Vec<ScalarField> },
}

impl<'a> Sampler<'a> {
    fn new(traj: &'a Trajectory) -> Self {
        let m = &traj.states[0].manifold;
        match m.kind() {
            ManifoldKind::FlatTorus => Sampler::Torus,
            ManifoldKind::RoundSphere => Sampler::Sphere(m),
            ManifoldKind::RotSymSurface => {
                let curvature = traj.states.iter().map(|s| scalar_curvature(&s.manifold)).collect();
                let phi = traj
                    .states
                    .iter()
                    .map(|s| match s.manifold.metric() {
                        MetricData::RotSymSurface { log_conformal } => {
                            s.manifold.field(log_conformal.clone()).expect("metric matches its grid")
                        }
                        _ => unreachable!(),
                    })
                    .collect();
                Sampler::Surface { traj, curvature, phi }
            }
        }
    }

    /// `(R, g_xx)` at `(x, t)`.
    fn sample(&self, x: f64, t: f64) -> (f64, f64) {
        match self {
            Sampler::Torus => (0.0, 1.0),
            Sampler::Sphere(m) => {
                let n = m.dim() as f64;
                let rho2 = match m.metric() {
                    MetricData::RoundSphere { initial_radius_sq } => initial_radius_sq - 2.0 * (n - 1.0) * t,
                    _ => unreachable!(),
                };
                (n * (n - 1.0) / rho2, rho2)
            }
            Sampler::Surface { traj, curvature, phi } => {
                let times = traj.times();
                let k = match times.iter().position(|&s| s >= t) {
                    Some(0) => 1,
                    Some(k) => k,
                    None => times.len() - 1,
                };
                let (ta, tb) = (times[k - 1], times[k]);
                let w = ((t - ta) / (tb - ta)).clamp(0.0, 1.0);
                let ma = &traj.states[k - 1].manifold;
                let mb = &traj.states[k].manifold;
                let r = (1.0 - w) * curvature[k - 1].interpolate(ma, x) + w * curvature[k].interpolate(mb, x);
                let ph = (1.0 - w) * phi[k - 1].interpolate(ma, x) + w * phi[k].interpolate(mb, x);
                (r, (2.0 * ph).exp())
            }
        }
    }
}

fn simpson(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / PANELS as f64;
    let mut sum = f(a) + f(b);
    for i in 1..PANELS {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// `int ((b-1)/b R + (b/4) |gamma'|^2_{g(tau)}) dtau` along the curve.
pub fn curve_action(traj: &Trajectory, curve: &SpaceTimeCurve, b: f64) -> f64 {
    let sampler = Sampler::new(traj);
    curve_action_with(&sampler, curve, b)
}

fn curve_action_with(sampler: &Sampler, curve: &SpaceTimeCurve, b: f64) -> f64 {
    curve
        .knots
        .windows(2)
        .map(|w| {
            let ((xa, ta), (xb, tb)) = (w[0], w[1]);
            let speed = (xb - xa) / (tb - ta);
            simpson(ta, tb, |t| {
                let x = xa + speed * (t - ta);
                let (r, g) = sampler.sample(x, t);
                (b - 1.0) / b * r + 0.25 * b * g * speed * speed
            })
        })
        .sum()
}

/// `int |gamma'|^2_{g(t1)} dtau` along the curve.
pub fn curve_energy_at_start(traj: &Trajectory, curve: &SpaceTimeCurve) -> f64 {
    let m = &traj.states[curve.start.state].manifold;
    curve
        .knots
        .windows(2)
        .map(|w| {
            let ((xa, ta), (xb, tb)) = (w[0], w[1]);
            let speed = (xb - xa) / (tb - ta);
            simpson(ta, tb, |t| radial_metric_at(m, xa + speed * (t - ta)) * speed * speed)
        })
        .sum()
}

/// Outcome of one per-curve check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathCheck {
    pub form: PathForm,
    /// Nonnegative when the inequality holds.
    pub slack: f64,
    /// `Gamma` for the multiplicative form, `int |gamma'|^2_{g(t1)}` for
    /// the additive one.
    pub action: f64,
    pub v1: f64,
    pub v2: f64,
    pub t1: f64,
    pub t2: f64,
}

/// Extremes over the stored trajectory used by the integrated forms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathBounds {
    pub v_min: f64,
    pub v_max: f64,
    pub r_max: f64,
}

impl PathBounds {
    pub fn of(traj: &Trajectory) -> Self {
        let v_min = traj.states.iter().map(|s| s.v.min()).fold(f64::INFINITY, f64::min);
        let v_max = traj.states.iter().map(|s| s.v.max()).fold(f64::NEG_INFINITY, f64::max);
        PathBounds { v_min, v_max, r_max: r_max(traj) }
    }
}

pub fn path_harnack_check(
    traj: &Trajectory,
    consts: &HarnackConstants,
    curve: &SpaceTimeCurve,
    form: PathForm,
) -> Result<PathCheck> {
    let bounds = PathBounds::of(traj);
    let sampler = Sampler::new(traj);
    check_with(traj, consts, curve, form, &bounds, &sampler)
}

fn check_with(
    traj: &Trajectory,
    consts: &HarnackConstants,
    curve: &SpaceTimeCurve,
    form: PathForm,
    bounds: &PathBounds,
    sampler: &Sampler,
) -> Result<PathCheck> {
    let v1 = traj.states[curve.start.state].v.get(curve.start.node);
    let v2 = traj.states[curve.end.state].v.get(curve.end.node);
    let (t1, t2) = (curve.t1(), curve.t2());
    let log_ratio = ((t2 - traj.t0) / (t1 - traj.t0)).ln();
    let b = consts.b;
    let drift = (b - 2.0).abs() / b * consts.c0;
    let (slack, action) = match form {
        PathForm::Multiplicative => {
            if !(bounds.v_min > 0.0) {
                return Err(Error::InvalidCurve("multiplicative form needs v_min > 0".into()));
            }
            let gamma = curve_action_with(sampler, curve, b);
            let slack = v2.ln() + consts.d / b * log_ratio + gamma / bounds.v_min + drift * bounds.r_max * (t2 - t1)
                - v1.ln();
            (slack, gamma)
        }
        PathForm::Additive => {
            let energy = curve_energy_at_start(traj, curve);
            let slack = v2 - v1
                + consts.d / b * bounds.v_max * log_ratio
                + ((b - 1.0) / b + drift * bounds.v_max) * bounds.r_max * (t2 - t1)
                + 0.25 * b * energy;
            (slack, energy)
        }
    };
    Ok(PathCheck { form, slack, action, v1, v2, t1, t2 })
}

/// Both forms over `count` seeded random curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSweep {
    pub curves: usize,
    pub multiplicative: MarginReport,
    pub additive: MarginReport,
}

pub fn path_sweep(
    traj: &Trajectory,
    consts: &HarnackConstants,
    seed: u64,
    count: usize,
    t_min: f64,
    tol: f64,
) -> Result<PathSweep> {
    let bounds = PathBounds::of(traj);
    let sampler = Sampler::new(traj);
    let results: Vec<Result<(SpaceTimeCurve, PathCheck, PathCheck)>> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let curve = SpaceTimeCurve::random(traj, seed, i, t_min)?;
            let mult = check_with(traj, consts, &curve, PathForm::Multiplicative, &bounds, &sampler)?;
            let add = check_with(traj, consts, &curve, PathForm::Additive, &bounds, &sampler)?;
            Ok((curve, mult, add))
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let valid = crate::ricci_flow::verify_hypotheses(&traj.manifolds())?.satisfied();
    let worst = |pick: fn(&(SpaceTimeCurve, PathCheck, PathCheck)) -> &PathCheck, name: &str| {
        let (curve, check) = results
            .iter()
            .map(|r| (&r.0, pick(r)))
            .fold(None::<(&SpaceTimeCurve, &PathCheck)>, |acc, (c, k)| match acc {
                Some((_, best)) if best.slack <= k.slack => acc,
                _ => Some((c, k)),
            })
            .expect("at least one curve");
        let m = &traj.states[curve.start.state].manifold;
        let worst_margin = -check.slack;
        MarginReport {
            estimate: format!("{name}_b{}", consts.b),
            worst_margin,
            location: Location { node: curve.start.node, coordinate: m.coordinate(curve.start.node), t: check.t1 },
            tolerance: tol,
            pass: valid && worst_margin <= tol,
            valid,
        }
    };
    if results.is_empty() {
        return Err(Error::InvalidParameter("path sweep needs at least one curve".into()));
    }
    Ok(PathSweep {
        curves: results.len(),
        multiplicative: worst(|r| &r.1, "path_multiplicative"),
        additive: worst(|r| &r.2, "path_additive"),
    })
}

/// Shortest-path approximation of the infimum of the action over curves
/// from `start` to `end`, restricted to curves that move between grid nodes
/// once per stored step. Diagnostic only.
pub fn lattice_action(traj: &Trajectory, b: f64, start: Anchor, end: Anchor) -> Result<f64> {
    if start.state >= end.state || end.state >= traj.len() {
        return Err(Error::InvalidCurve("lattice path needs k1 < k2 within the trajectory".into()));
    }
    let m = &traj.states[0].manifold;
    let nodes = m.len();
    let dx = |i: usize, j: usize| -> f64 {
        let d = m.coordinate(j) - m.coordinate(i);
        match m.period() {
            Some(l) => d - (d / l).round() * l,
            None => d,
        }
    };
    let mut cost = vec![f64::INFINITY; nodes];
    cost[start.node] = 0.0;
    for k in start.state..end.state {
        let (sa, sb) = (&traj.states[k], &traj.states[k + 1]);
        let dt = sb.time() - sa.time();
        let ra = scalar_curvature(&sa.manifold);
        let rb = scalar_curvature(&sb.manifold);
        let next: Vec<f64> = (0..nodes)
            .into_par_iter()
            .map(|j| {
                (0..nodes)
                    .filter(|&i| cost[i].is_finite())
                    .map(|i| {
                        let g = 0.5 * (sa.manifold.conformal_factor(i) + sb.manifold.conformal_factor(j));
                        let speed = dx(i, j) / dt;
                        let r = 0.5 * (ra.get(i) + rb.get(j));
                        cost[i] + dt * ((b - 1.0) / b * r + 0.25 * b * g * speed * speed)
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        cost = next;
    }
    Ok(cost[end.node])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harnack::{constants, Variant};
    use crate::pme::{run, InitialData, PmeParams};
    use std::f64::consts::PI;

    fn torus_run(initial: InitialData) -> Trajectory {
        let m = ManifoldState::flat_torus(vec![2.0 * PI], 32).unwrap();
        run(&PmeParams::new(2.0, initial, 0.1, 0.01), &m).unwrap()
    }

    fn sphere_run() -> Trajectory {
        let m = ManifoldState::round_sphere(2, 1.0, 32).unwrap();
        run(&PmeParams::new(2.0, InitialData::Constant { value: 1.0 }, 0.1, 0.01), &m).unwrap()
    }

    #[test]
    fn random_curves_are_reproducible_per_stream() {
        let traj = torus_run(InitialData::CosineBump { base: 1.0, amplitude: 0.2, mode: 1 });
        let a = SpaceTimeCurve::random(&traj, 7, 3, 0.01).unwrap();
        assert_eq!(a, SpaceTimeCurve::random(&traj, 7, 3, 0.01).unwrap());
        let others: Vec<_> = (0..8).map(|i| SpaceTimeCurve::random(&traj, 7, i, 0.01).unwrap()).collect();
        assert!(others.iter().filter(|c| **c == a).count() == 1);
        for c in &others {
            assert!(c.knots.windows(2).all(|w| w[1].1 > w[0].1));
            assert!(c.t1() >= 0.01 - 1e-12);
        }
    }

    #[test]
    fn constant_curve_slack_is_the_time_term() {
        let traj = torus_run(InitialData::Constant { value: 1.0 });
        let c = constants(1, 2.0, 2.0, Variant::SharpB2).unwrap();
        let curve = SpaceTimeCurve::constant(&traj, 4, 2, 8).unwrap();
        assert_eq!(curve_action(&traj, &curve, 2.0), 0.0);
        let check = path_harnack_check(&traj, &c, &curve, PathForm::Multiplicative).unwrap();
        assert!((check.slack - c.d / 2.0 * 4f64.ln()).abs() < 1e-12);
        let add = path_harnack_check(&traj, &c, &curve, PathForm::Additive).unwrap();
        assert!((add.slack - c.d / 2.0 * 2.0 * 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn torus_end_knot_is_unwrapped() {
        let traj = torus_run(InitialData::Constant { value: 1.0 });
        let start = Anchor { node: 1, state: 1 };
        let end = Anchor { node: 31, state: 3 };
        let curve = SpaceTimeCurve::new(&traj, start, end, &[]).unwrap();
        let h = 2.0 * PI / 32.0;
        assert!((curve.knots[1].0 - (-h)).abs() < 1e-12);
        let energy = curve_energy_at_start(&traj, &curve);
        assert!((energy - 4.0 * h * h / 0.02).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_curves() {
        let traj = torus_run(InitialData::Constant { value: 1.0 });
        assert!(SpaceTimeCurve::constant(&traj, 0, 3, 3).is_err());
        assert!(SpaceTimeCurve::constant(&traj, 0, 0, 3).is_err());
        assert!(SpaceTimeCurve::constant(&traj, 99, 1, 3).is_err());
        let (a, b) = (Anchor { node: 0, state: 1 }, Anchor { node: 0, state: 5 });
        assert!(SpaceTimeCurve::new(&traj, a, b, &[(0.0, 0.09)]).is_err());
    }

    #[test]
    fn sphere_action_along_a_fixed_point() {
        // R(t) = 2/(1-2t), so the action of a constant curve is (1/2) ln ratio.
        let traj = sphere_run();
        let curve = SpaceTimeCurve::constant(&traj, 10, 2, 9).unwrap();
        let b = 2.0;
        let want = (b - 1.0) / b * ((1.0f64 - 2.0 * 0.02) / (1.0 - 2.0 * 0.09)).ln();
        assert!((curve_action(&traj, &curve, b) - want).abs() < 1e-9);
    }

    #[test]
    fn lattice_action_stays_put_on_a_flat_torus() {
        let traj = torus_run(InitialData::Constant { value: 1.0 });
        let a = Anchor { node: 3, state: 1 };
        assert_eq!(lattice_action(&traj, 2.0, a, Anchor { node: 3, state: 6 }).unwrap(), 0.0);
        let moved = lattice_action(&traj, 2.0, a, Anchor { node: 5, state: 6 }).unwrap();
        let h = 2.0 * PI / 32.0;
        // Two one-cell hops beat one two-cell hop; the continuum value is lower.
        assert!((moved - 2.0 * 0.5 * h * h / 0.01).abs() < 1e-9);
        assert!(moved > 0.5 * (2.0 * h).powi(2) / 0.05);
    }
}
