//! Identity sides against closed forms on the homogeneous sphere, and
//! convergence of the residuals on a deformed surface with general forcing.

use pme_ricci::geometry::ManifoldState;
use pme_ricci::identities::{
    assign_orders, bochner_residual, f_evolution_residual, f_evolution_sides, f_rearranged_sides, quotient_rule_sides,
};
use pme_ricci::pme::{run, InitialData, PmeParams, Trajectory};

struct Homogeneous {
    n: f64,
    p: f64,
    a: f64,
    r0_sq: f64,
}

impl Homogeneous {
    fn rho_sq(&self, t: f64) -> f64 {
        self.r0_sq - 2.0 * (self.n - 1.0) * t
    }
    fn r(&self, t: f64) -> f64 {
        self.n * (self.n - 1.0) / self.rho_sq(t)
    }
    fn v(&self, t: f64) -> f64 {
        let u = (self.r0_sq / self.rho_sq(t)).powf(self.a * self.n / 2.0);
        self.p / (self.p - 1.0) * u.powf(self.p - 1.0)
    }
    fn v_t(&self, t: f64) -> f64 {
        self.a * (self.p - 1.0) * self.r(t) * self.v(t)
    }
    fn r_t(&self, t: f64) -> f64 {
        2.0 * self.r(t).powi(2) / self.n
    }
    /// `L F` for spatially constant `v`, where `F = -b v_t/v + c R/v`.
    fn lf(&self, t: f64, b: f64, c: f64) -> f64 {
        let (r, v) = (self.r(t), self.v(t));
        -self.a * b * (self.p - 1.0) * self.r_t(t) + c * self.r_t(t) / v - c * r * self.v_t(t) / (v * v)
    }
}

fn close(x: f64, want: f64, rel: f64) -> bool {
    (x - want).abs() <= rel * want.abs().max(1.0)
}

#[test]
fn homogeneous_sphere_sides_match_closed_form() {
    for (n, p, a, r0_sq) in [(2usize, 2.0, 1.0, 1.0), (3, 3.0, 1.0, 2.0), (2, 1.5, 0.5, 1.0)] {
        let mut params = PmeParams::new(p, InitialData::Constant { value: 1.0 }, 0.2, 1e-4).with_store_every(20);
        params.a = a;
        let traj = run(&params, &ManifoldState::round_sphere(n, r0_sq, 32).unwrap()).unwrap();
        let h = Homogeneous { n: n as f64, p, a, r0_sq };
        let (b, c) = (1.5, 0.3);
        let sides = f_evolution_sides(&traj, a, b, c).unwrap();
        let v: Vec<_> = traj.states.iter().map(|s| s.v.clone()).collect();
        let v2: Vec<_> = traj.states.iter().map(|s| s.v.map(|x| x * x)).collect();
        let quotient = quotient_rule_sides(&v2, &v, &traj).unwrap();
        for k in 4..traj.len() - 4 {
            let t = traj.states[k].time();
            for j in [0, 5, 16, 32] {
                assert!(close(sides[k].0.get(j), h.lf(t, b, c), 1e-6), "n={n} t={t}");
                assert!(close(sides[k].1.get(j), h.lf(t, b, c), 1e-12), "n={n} t={t}");
                assert!(close(quotient[k].0.get(j), h.v_t(t), 1e-6));
                assert!(close(quotient[k].1.get(j), h.v_t(t), 1e-6));
            }
        }
        if a == 1.0 {
            let b = 2.5;
            let rearranged = f_rearranged_sides(&traj, b).unwrap();
            for (s, (lhs, rhs)) in traj.states.iter().zip(&rearranged).take(traj.len() - 4).skip(4) {
                let want = h.lf(s.time(), b, 1.0 - b);
                assert!(close(lhs.get(7), want, 1e-6));
                assert!(close(rhs.get(7), want, 1e-12));
            }
        }
    }
}

fn surface_level(cells: usize) -> Trajectory {
    let scale = (cells / 16) as f64;
    let m = ManifoldState::rotsym_from_fn(cells, |th| 0.1 * (3.0 * th.cos().powi(2) - 1.0) / 2.0).unwrap();
    let mut params = PmeParams::new(
        2.0,
        InitialData::CosineBump { base: 1.0, amplitude: 0.2, mode: 1 },
        0.02,
        5e-4 / (scale * scale),
    )
    .with_store_every((scale * scale) as usize);
    params.a = 0.5;
    run(&params, &m).unwrap()
}

#[test]
fn surface_evolution_identity_converges() {
    let mut levels: Vec<_> =
        [16, 32, 64].iter().map(|&n| f_evolution_residual(&surface_level(n), 0.5, 1.5, 0.3).unwrap()).collect();
    assign_orders(&mut levels);
    for l in &levels[1..] {
        let order = l.measured_order.unwrap();
        assert!(order >= 1.8, "{levels:?}");
    }
}

#[test]
fn bochner_on_surface_converges() {
    let residual = |cells| {
        let m = ManifoldState::rotsym_from_fn(cells, |th| 0.2 * th.cos().powi(2)).unwrap();
        let f = m.field_from_fn(|th| th.cos() + 0.3 * (2.0 * th).cos()).unwrap();
        bochner_residual(&f, &m).unwrap().max_abs_residual
    };
    let (r32, r64, r128) = (residual(32), residual(64), residual(128));
    assert!((r32 / r64).log2() >= 1.8 && (r64 / r128).log2() >= 1.8, "{r32} {r64} {r128}");
}
