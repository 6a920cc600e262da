//! Both sides of the evolution identities of the Harnack quantity, evaluated
//! on solver trajectories.
//!
//! The left-hand sides difference stored fields in time; the right-hand
//! sides are assembled from spatial primitives of `v` and the curvature only.
//! Time derivatives use five-point fourth-order stencils (one-sided at the
//! two ends), so a trajectory needs at least five stored states. Residuals
//! skip the first and last two stored times and, on polar grids, the poles
//! and their neighbours.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    gradient_dot, gradient_norm_sq, hessian_components, hessian_norm_sq, laplacian,
    ricci_eigenvalue, ricci_hessian, ricci_norm_sq, ricci_quadratic, scalar_curvature, ManifoldKind,
    ManifoldState, ScalarField,
};
use crate::harnack::harnack_f;
use crate::pme::Trajectory;
use crate::ricci_flow::scalar_curvature_rates;

/// Stored states needed by the fourth-order stencils.
pub const MIN_STATES: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub id: String,
    pub max_abs_residual: f64,
    pub cells: usize,
    /// Stored time step (0 for static checks).
    pub dt: f64,
    pub measured_order: Option<f64>,
}

/// Fill `measured_order` of each entry from its predecessor, for a sequence
/// refined by `h -> h/2`.
pub fn assign_orders(levels: &mut [IdentityResidual]) {
    for i in 1..levels.len() {
        let (coarse, fine) = (levels[i - 1].max_abs_residual, levels[i].max_abs_residual);
        levels[i].measured_order = Some((coarse / fine).ln() / 2f64.ln());
    }
}

/// Fourth-order time derivative of a uniformly spaced history.
pub fn time_derivative4(history: &[ScalarField], times: &[f64]) -> Result<Vec<ScalarField>> {
    let k = history.len();
    if k < MIN_STATES {
        return Err(Error::TrajectoryTooShort { needed: MIN_STATES, found: k });
    }
    let h = (times[k - 1] - times[0]) / (k - 1) as f64;
    let nodes = history[0].len();
    Ok((0..k)
        .map(|i| {
            let (offset, w): (usize, [f64; 5]) = match i {
                0 => (0, [-25.0, 48.0, -36.0, 16.0, -3.0]),
                1 => (0, [-3.0, -10.0, 18.0, -6.0, 1.0]),
                _ if i == k - 2 => (k - 5, [-1.0, 6.0, -18.0, 10.0, 3.0]),
                _ if i == k - 1 => (k - 5, [3.0, -16.0, 36.0, -48.0, 25.0]),
                _ => (i - 2, [1.0, -8.0, 0.0, 8.0, -1.0]),
            };
            let values = (0..nodes)
                .map(|j| (0..5).map(|q| w[q] * history[offset + q].get(j)).sum::<f64>() / (12.0 * h))
                .collect();
            history[i].with_values(values)
        })
        .collect())
}

/// Stored quantities shared by the trajectory identities.
struct Context<'a> {
    traj: &'a Trajectory,
    times: Vec<f64>,
    v_t: Vec<ScalarField>,
    r: Vec<ScalarField>,
    r_t: Vec<ScalarField>,
}

impl<'a> Context<'a> {
    fn new(traj: &'a Trajectory) -> Result<Self> {
        if traj.len() < MIN_STATES {
            return Err(Error::TrajectoryTooShort { needed: MIN_STATES, found: traj.len() });
        }
        let times = traj.times();
        let vs: Vec<ScalarField> = traj.states.iter().map(|s| s.v.clone()).collect();
        let v_t = time_derivative4(&vs, &times)?;
        let r: Vec<ScalarField> = traj.states.iter().map(|s| scalar_curvature(&s.manifold)).collect();
        let r_t = match traj.kind() {
            ManifoldKind::RotSymSurface => time_derivative4(&r, &times)?,
            _ => scalar_curvature_rates(&traj.manifolds())?,
        };
        Ok(Context { traj, times, v_t, r, r_t })
    }

    fn p(&self) -> f64 {
        self.traj.p
    }

    fn m(&self, k: usize) -> &ManifoldState {
        &self.traj.states[k].manifold
    }

    fn v(&self, k: usize) -> &ScalarField {
        &self.traj.states[k].v
    }

    /// `d/dt f - (p-1) v Delta f` at stored index `k` from a history of `f`.
    fn l_operator(&self, f_t: &[ScalarField], f: &[ScalarField], k: usize) -> Result<ScalarField> {
        let lap = laplacian(&f[k], self.m(k))?;
        let v = self.v(k);
        let p = self.p();
        Ok(f_t[k].with_values((0..v.len()).map(|j| f_t[k].get(j) - (p - 1.0) * v.get(j) * lap.get(j)).collect()))
    }

    fn interior_times(&self) -> std::ops::Range<usize> {
        2..self.traj.len() - 2
    }

    fn residual(&self, id: &str, mut sides: impl FnMut(usize) -> Result<(ScalarField, ScalarField)>) -> Result<IdentityResidual> {
        let mut worst: f64 = 0.0;
        for k in self.interior_times() {
            let (lhs, rhs) = sides(k)?;
            let mask = interior_nodes(self.m(k));
            for (j, _) in mask.iter().enumerate().filter(|(_, &inside)| inside) {
                worst = worst.max((lhs.get(j) - rhs.get(j)).abs());
            }
        }
        Ok(IdentityResidual {
            id: id.to_string(),
            max_abs_residual: worst,
            cells: self.m(0).cells(),
            dt: self.traj.stored_dt(),
            measured_order: None,
        })
    }
}

/// Nodes used by the residuals: all of them on the torus, all but the poles
/// and their neighbours on polar grids.
pub fn interior_nodes(m: &ManifoldState) -> Vec<bool> {
    let len = m.len();
    if m.kind().is_polar() {
        (0..len).map(|j| j >= 2 && j + 2 < len).collect()
    } else {
        vec![true; len]
    }
}

/// `L f = d/dt f - (p-1) v Delta f` at every stored time, for a history `f`
/// aligned with the trajectory.
pub fn l_operator(f: &[ScalarField], traj: &Trajectory) -> Result<Vec<ScalarField>> {
    if f.len() != traj.len() {
        return Err(Error::TrajectoryTooShort { needed: traj.len(), found: f.len() });
    }
    let ctx = Context::new(traj)?;
    let f_t = time_derivative4(f, &ctx.times)?;
    (0..traj.len()).map(|k| ctx.l_operator(&f_t, f, k)).collect()
}

/// Histories entering the quotient rule.
struct Quotient {
    f: Vec<ScalarField>,
    g: Vec<ScalarField>,
    q: Vec<ScalarField>,
    f_t: Vec<ScalarField>,
    g_t: Vec<ScalarField>,
    q_t: Vec<ScalarField>,
}

impl Quotient {
    fn new(ctx: &Context, f: &[ScalarField], g: &[ScalarField]) -> Result<Self> {
        if f.len() != ctx.traj.len() || g.len() != ctx.traj.len() {
            return Err(Error::TrajectoryTooShort { needed: ctx.traj.len(), found: f.len().min(g.len()) });
        }
        for (k, gk) in g.iter().enumerate() {
            if let Some(j) = gk.values().iter().position(|&x| !(x > 0.0)) {
                return Err(Error::PositivityLost { what: "g", node: j, time: ctx.times[k] });
            }
        }
        let q: Vec<ScalarField> = f.iter().zip(g).map(|(a, b)| a.zip_with(b, |x, y| x / y)).collect::<Result<_>>()?;
        Ok(Quotient {
            f_t: time_derivative4(f, &ctx.times)?,
            g_t: time_derivative4(g, &ctx.times)?,
            q_t: time_derivative4(&q, &ctx.times)?,
            f: f.to_vec(),
            g: g.to_vec(),
            q,
        })
    }

    fn sides(&self, ctx: &Context, k: usize) -> Result<(ScalarField, ScalarField)> {
        let lhs = ctx.l_operator(&self.q_t, &self.q, k)?;
        let lf = ctx.l_operator(&self.f_t, &self.f, k)?;
        let lg = ctx.l_operator(&self.g_t, &self.g, k)?;
        let m = ctx.m(k);
        let cross = gradient_dot(&self.q[k], &self.g[k].map(f64::ln), m)?;
        let v = ctx.v(k);
        let p = ctx.p();
        let rhs = (0..m.len())
            .map(|j| {
                let (fj, gj) = (self.f[k].get(j), self.g[k].get(j));
                lf.get(j) / gj - fj / (gj * gj) * lg.get(j) + 2.0 * (p - 1.0) * v.get(j) * cross.get(j)
            })
            .collect();
        Ok((lhs, m.field(rhs)?))
    }
}

/// Both sides of the quotient rule
/// `L(f/g) = L f / g - f L g / g^2 + 2(p-1) v <grad(f/g), grad ln g>`
/// at every stored time.
pub fn quotient_rule_sides(f: &[ScalarField], g: &[ScalarField], traj: &Trajectory) -> Result<Vec<(ScalarField, ScalarField)>> {
    let ctx = Context::new(traj)?;
    let quotient = Quotient::new(&ctx, f, g)?;
    (0..traj.len()).map(|k| quotient.sides(&ctx, k)).collect()
}

pub fn quotient_rule_residual(f: &[ScalarField], g: &[ScalarField], traj: &Trajectory) -> Result<IdentityResidual> {
    let ctx = Context::new(traj)?;
    let quotient = Quotient::new(&ctx, f, g)?;
    ctx.residual("quotient_rule", |k| quotient.sides(&ctx, k))
}

/// Spatial ingredients of the right-hand sides at one stored time.
struct Terms {
    grad_v2: ScalarField,
    lap_v: ScalarField,
    hess2: ScalarField,
    ric_vv: ScalarField,
    ric_hess: ScalarField,
    ric2: ScalarField,
    grad_r_v: ScalarField,
}

fn terms(m: &ManifoldState, v: &ScalarField, r: &ScalarField) -> Result<Terms> {
    Ok(Terms {
        grad_v2: gradient_norm_sq(v, m)?,
        lap_v: laplacian(v, m)?,
        hess2: hessian_norm_sq(v, m)?,
        ric_vv: ricci_quadratic(v, m)?,
        ric_hess: ricci_hessian(v, m)?,
        ric2: ricci_norm_sq(m),
        grad_r_v: gradient_dot(r, v, m)?,
    })
}

/// History of the Harnack quantity with `v_t` from the fourth-order
/// differences, in the form containing `v_t`.
fn f_history(ctx: &Context, a: f64, b: f64, c: f64) -> Result<Vec<ScalarField>> {
    (0..ctx.traj.len())
        .map(|k| Ok(harnack_f(ctx.m(k), ctx.v(k), &ctx.v_t[k], ctx.p(), a, b, c)?.first))
        .collect()
}

fn lhs_of_f(ctx: &Context, a: f64, b: f64, c: f64) -> Result<Vec<ScalarField>> {
    let f = f_history(ctx, a, b, c)?;
    let f_t = time_derivative4(&f, &ctx.times)?;
    (0..ctx.traj.len()).map(|k| ctx.l_operator(&f_t, &f, k)).collect()
}

/// `F` from spatial data only (the pressure equation eliminates `v_t`).
fn f_spatial(ctx: &Context, k: usize, a: f64, b: f64, c: f64) -> Result<ScalarField> {
    let zero = ctx.v(k).map(|_| 0.0);
    Ok(harnack_f(ctx.m(k), ctx.v(k), &zero, ctx.p(), a, b, c)?.second)
}

fn check_forcing(traj: &Trajectory, a: f64) -> Result<()> {
    if (traj.a - a).abs() > 1e-15 * a.abs().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "trajectory was computed with forcing coefficient {} but the identity was asked for a = {a}",
            traj.a
        )));
    }
    Ok(())
}

fn general_rhs(ctx: &Context, k: usize, a: f64, b: f64, c: f64) -> Result<ScalarField> {
    let m = ctx.m(k);
    let v = ctx.v(k);
    let r = &ctx.r[k];
    let r_t = &ctx.r_t[k];
    let t = terms(m, v, r)?;
    let grad_f_v = gradient_dot(&f_spatial(ctx, k, a, b, c)?, v, m)?;
    let p = ctx.p();
    let q = p - 1.0;
    let values = (0..m.len())
        .map(|j| {
            let (vj, rj, rtj) = (v.get(j), r.get(j), r_t.get(j));
            let g = t.grad_v2.get(j);
            let lap = t.lap_v.get(j);
            let ric_vv = t.ric_vv.get(j);
            let grad_r_v = t.grad_r_v.get(j);
            let mut s = 2.0 * p * grad_f_v.get(j);
            s += (c * rtj - 2.0 * c * grad_r_v + 2.0 * (1.0 - b) * ric_vv) / vj;
            s -= q * ((a * b + c) * rtj - 2.0 * a * grad_r_v + 2.0 * ric_vv);
            s += -2.0 * q * t.hess2.get(j) - 2.0 * b * q * t.ric_hess.get(j) + 2.0 * c * q * t.ric2.get(j);
            s += -b * q * q * lap * lap + 2.0 * (1.0 - b) * q * g / vj * lap - a * b * q * q * rj * lap;
            s += a * (1.0 - b) * q * g / vj * rj + (1.0 - b) * g * g / (vj * vj) + c * g / (vj * vj) * rj
                - a * c * q * rj * rj / vj;
            s
        })
        .collect();
    m.field(values)
}

fn rearranged_rhs(ctx: &Context, k: usize, b: f64) -> Result<ScalarField> {
    let m = ctx.m(k);
    let v = ctx.v(k);
    let r = &ctx.r[k];
    let r_t = &ctx.r_t[k];
    let grad_v2 = gradient_norm_sq(v, m)?;
    let grad_r_v = gradient_dot(r, v, m)?;
    let ric_vv = ricci_quadratic(v, m)?;
    let ric2 = ricci_norm_sq(m);
    let shift: Vec<f64> = ricci_eigenvalue(m).values().iter().map(|x| 0.5 * b * x).collect();
    let completed = hessian_components(v, m)?.shifted_norm_sq(&shift);
    let f = f_spatial(ctx, k, 1.0, b, 1.0 - b)?;
    let grad_f_v = gradient_dot(&f, v, m)?;
    let p = ctx.p();
    let q = p - 1.0;
    let values = (0..m.len())
        .map(|j| {
            let (vj, rj, fj) = (v.get(j), r.get(j), f.get(j));
            let y = grad_v2.get(j) / vj + rj / vj;
            let mut s = 2.0 * p * grad_f_v.get(j);
            s -= ((b - 1.0) / vj + q) * (r_t.get(j) - 2.0 * grad_r_v.get(j) + 2.0 * ric_vv.get(j));
            s += -2.0 * q * completed[j] + (b - 2.0).powi(2) / 2.0 * q * ric2.get(j) - fj * fj / b;
            s -= (q * rj + 2.0 * (b - 1.0) / b * rj / vj) * fj;
            s -= (b - 1.0) / b * y * y + (b - 1.0) * (b - 2.0) / b * y * rj / vj;
            s
        })
        .collect();
    m.field(values)
}

/// `(L F, right side)` of the general evolution identity at every stored
/// time.
pub fn f_evolution_sides(traj: &Trajectory, a: f64, b: f64, c: f64) -> Result<Vec<(ScalarField, ScalarField)>> {
    check_forcing(traj, a)?;
    let ctx = Context::new(traj)?;
    let lhs = lhs_of_f(&ctx, a, b, c)?;
    lhs.into_iter().enumerate().map(|(k, l)| Ok((l, general_rhs(&ctx, k, a, b, c)?))).collect()
}

pub fn f_evolution_residual(traj: &Trajectory, a: f64, b: f64, c: f64) -> Result<IdentityResidual> {
    check_forcing(traj, a)?;
    let ctx = Context::new(traj)?;
    let lhs = lhs_of_f(&ctx, a, b, c)?;
    ctx.residual("f_evolution", |k| Ok((lhs[k].clone(), general_rhs(&ctx, k, a, b, c)?)))
}

/// `(L F, right side)` of the simplified identity (`a = 1`, `c = 1 - b`).
pub fn f_rearranged_sides(traj: &Trajectory, b: f64) -> Result<Vec<(ScalarField, ScalarField)>> {
    check_forcing(traj, 1.0)?;
    let ctx = Context::new(traj)?;
    let lhs = lhs_of_f(&ctx, 1.0, b, 1.0 - b)?;
    lhs.into_iter().enumerate().map(|(k, l)| Ok((l, rearranged_rhs(&ctx, k, b)?))).collect()
}

pub fn f_rearranged_residual(traj: &Trajectory, b: f64) -> Result<IdentityResidual> {
    check_forcing(traj, 1.0)?;
    let ctx = Context::new(traj)?;
    let lhs = lhs_of_f(&ctx, 1.0, b, 1.0 - b)?;
    ctx.residual("f_rearranged", |k| Ok((lhs[k].clone(), rearranged_rhs(&ctx, k, b)?)))
}

/// Largest difference between the two independently assembled right sides
/// at `a = 1`, `c = 1 - b`; pure algebra, so roundoff only.
pub fn rhs_agreement(traj: &Trajectory, b: f64) -> Result<IdentityResidual> {
    check_forcing(traj, 1.0)?;
    let ctx = Context::new(traj)?;
    ctx.residual("rhs_agreement", |k| Ok((general_rhs(&ctx, k, 1.0, b, 1.0 - b)?, rearranged_rhs(&ctx, k, b)?)))
}

/// Sides of `Delta |grad f|^2 = 2 <grad Delta f, grad f> + 2 |Hess f|^2 + 2 Rc(grad f, grad f)`.
pub fn bochner_sides(f: &ScalarField, m: &ManifoldState) -> Result<(ScalarField, ScalarField)> {
    let lhs = laplacian(&gradient_norm_sq(f, m)?, m)?;
    let cross = gradient_dot(&laplacian(f, m)?, f, m)?;
    let hess = hessian_norm_sq(f, m)?;
    let ric = ricci_quadratic(f, m)?;
    let rhs = (0..m.len()).map(|j| 2.0 * (cross.get(j) + hess.get(j) + ric.get(j))).collect();
    Ok((lhs, m.field(rhs)?))
}

pub fn bochner_residual(f: &ScalarField, m: &ManifoldState) -> Result<IdentityResidual> {
    let (lhs, rhs) = bochner_sides(f, m)?;
    let mask = interior_nodes(m);
    let worst = (0..m.len()).filter(|&j| mask[j]).map(|j| (lhs.get(j) - rhs.get(j)).abs()).fold(0.0, f64::max);
    Ok(IdentityResidual { id: "bochner".into(), max_abs_residual: worst, cells: m.cells(), dt: 0.0, measured_order: None })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YzCheck {
    /// `max |F - (y - b z)|`, roundoff only.
    pub decomposition: IdentityResidual,
    /// `max |(y - z) + (p-1) Delta v + (p-1) R|`, the `b = 1` collapse.
    pub pressure_form: IdentityResidual,
}

/// `y = |grad v|^2/v + R/v`, `z = v_t/v + R/v`.
pub fn yz_decomposition_check(traj: &Trajectory, b: f64) -> Result<YzCheck> {
    check_forcing(traj, 1.0)?;
    let ctx = Context::new(traj)?;
    let p = ctx.p();
    let yz = |k: usize| -> Result<(Vec<f64>, Vec<f64>)> {
        let m = ctx.m(k);
        let v = ctx.v(k);
        let g = gradient_norm_sq(v, m)?;
        let r = &ctx.r[k];
        let y = (0..m.len()).map(|j| g.get(j) / v.get(j) + r.get(j) / v.get(j)).collect();
        let z = (0..m.len()).map(|j| ctx.v_t[k].get(j) / v.get(j) + r.get(j) / v.get(j)).collect();
        Ok((y, z))
    };
    let decomposition = ctx.residual("yz_decomposition", |k| {
        let f = harnack_f(ctx.m(k), ctx.v(k), &ctx.v_t[k], p, 1.0, b, 1.0 - b)?.first;
        let (y, z) = yz(k)?;
        let rhs = f.with_values(y.iter().zip(&z).map(|(y, z)| y - b * z).collect());
        Ok((f, rhs))
    })?;
    let pressure_form = ctx.residual("yz_pressure_form", |k| {
        let m = ctx.m(k);
        let (y, z) = yz(k)?;
        let lap = laplacian(ctx.v(k), m)?;
        let r = &ctx.r[k];
        let lhs = lap.with_values(y.iter().zip(&z).map(|(y, z)| y - z).collect());
        let rhs = lap.with_values((0..m.len()).map(|j| -(p - 1.0) * (lap.get(j) + r.get(j))).collect());
        Ok((lhs, rhs))
    })?;
    Ok(YzCheck { decomposition, pressure_form })
}

/// `v_t` from the fourth-order time differences, aligned with the
/// trajectory; the stored second-order `v_t` is what the margins use.
pub fn pressure_rate4(traj: &Trajectory) -> Result<Vec<ScalarField>> {
    Ok(Context::new(traj)?.v_t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pme::{run, InitialData, PmeParams};
    use std::f64::consts::PI;

    fn bump_trajectory(cells: usize, dt: f64) -> Trajectory {
        let m = ManifoldState::flat_torus(vec![2.0 * PI], cells).unwrap();
        let params = PmeParams::new(2.0, InitialData::CosineBump { base: 1.0, amplitude: 0.2, mode: 1 }, 0.1, dt);
        run(&params, &m).unwrap()
    }

    #[test]
    fn fourth_order_stencils_are_exact_on_quartics() {
        let m = ManifoldState::flat_torus(vec![1.0], 16).unwrap();
        let times: Vec<f64> = (0..7).map(|k| 0.3 + 0.1 * k as f64).collect();
        let hist: Vec<_> = times.iter().map(|t| m.constant_field(t.powi(4) - 2.0 * t).unwrap()).collect();
        let d = time_derivative4(&hist, &times).unwrap();
        for (t, f) in times.iter().zip(&d) {
            assert!((f.get(3) - (4.0 * t.powi(3) - 2.0)).abs() < 1e-12);
        }
        assert!(time_derivative4(&hist[..4], &times[..4]).is_err());
    }

    #[test]
    fn l_operator_of_constant_and_static_fields() {
        let traj = bump_trajectory(32, 0.01);
        let c: Vec<_> = traj.states.iter().map(|s| s.manifold.constant_field(3.0 * s.time()).unwrap()).collect();
        for lf in l_operator(&c, &traj).unwrap() {
            assert!(lf.values().iter().all(|x| (x - 3.0).abs() < 1e-10));
        }
        let m = &traj.states[0].manifold;
        let f = m.field_from_fn(|x| (2.0 * x).sin()).unwrap();
        let hist = vec![f.clone(); traj.len()];
        let lf = l_operator(&hist, &traj).unwrap();
        let lap = laplacian(&f, m).unwrap();
        for j in 0..m.len() {
            assert!((lf[4].get(j) + traj.states[4].v.get(j) * lap.get(j)).abs() < 1e-12);
        }
    }

    #[test]
    fn quotient_rule_trivial_cases() {
        let traj = bump_trajectory(32, 0.01);
        let v: Vec<_> = traj.states.iter().map(|s| s.v.clone()).collect();
        let one: Vec<_> = traj.states.iter().map(|s| s.manifold.constant_field(1.0).unwrap()).collect();
        assert!(quotient_rule_residual(&v, &one, &traj).unwrap().max_abs_residual < 1e-12);
        assert!(quotient_rule_residual(&v, &v, &traj).unwrap().max_abs_residual < 1e-10);
    }

    #[test]
    fn identities_vanish_on_constant_data() {
        let m = ManifoldState::flat_torus(vec![2.0 * PI], 32).unwrap();
        let params = PmeParams::new(2.0, InitialData::Constant { value: 1.0 }, 0.1, 0.01);
        let traj = run(&params, &m).unwrap();
        assert_eq!(f_evolution_residual(&traj, 1.0, 2.0, -1.0).unwrap().max_abs_residual, 0.0);
        assert_eq!(f_rearranged_residual(&traj, 1.5).unwrap().max_abs_residual, 0.0);
        assert!(f_evolution_residual(&traj, 0.5, 2.0, -1.0).is_err());
    }

    #[test]
    fn decomposition_is_algebraic() {
        let traj = bump_trajectory(32, 0.01);
        for b in [1.0, 2.0, 3.5] {
            assert!(yz_decomposition_check(&traj, b).unwrap().decomposition.max_abs_residual < 1e-12);
        }
        assert!(rhs_agreement(&traj, 1.5).unwrap().max_abs_residual < 1e-10);
    }

    #[test]
    fn bochner_constant_is_exact() {
        let m = ManifoldState::round_sphere(3, 2.0, 32).unwrap();
        assert_eq!(bochner_residual(&m.constant_field(4.0).unwrap(), &m).unwrap().max_abs_residual, 0.0);
    }

    #[test]
    fn orders_from_halving() {
        let mk = |r| IdentityResidual { id: "x".into(), max_abs_residual: r, cells: 0, dt: 0.0, measured_order: None };
        let mut levels = vec![mk(1.6e-3), mk(4e-4), mk(1e-4)];
        assign_orders(&mut levels);
        assert_eq!(levels[0].measured_order, None);
        assert!((levels[2].measured_order.unwrap() - 2.0).abs() < 1e-12);
    }
}
