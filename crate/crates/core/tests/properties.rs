use std::f64::consts::PI;

use proptest::prelude::*;

use pme_ricci::geometry::{integrate, laplacian, ManifoldState};
use pme_ricci::harnack::{constants, SpaceTimeCurve, Variant};
use pme_ricci::pme::{max_relative_mass_drift, run, InitialData, PmeParams};
use pme_ricci::runner::parse_config;

fn manifold(kind: u8, cells: usize, shape: f64) -> ManifoldState {
    match kind {
        0 => ManifoldState::flat_torus(vec![2.0 * PI * (1.0 + shape.abs())], cells).unwrap(),
        1 => ManifoldState::round_sphere(2 + (cells % 3), 1.0 + shape.abs(), cells).unwrap(),
        _ => ManifoldState::rotsym_from_fn(cells, |th| shape * th.cos().powi(2)).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_integrates_to_zero(
        kind in 0u8..3,
        cells in 16usize..80,
        shape in -0.4f64..0.4,
        coeffs in prop::collection::vec(-1.0f64..1.0, 4),
    ) {
        let m = manifold(kind, cells, shape);
        let scale = m.period().map_or(1.0, |l| 2.0 * PI / l);
        let f = m.field_from_fn(|x| {
            coeffs.iter().enumerate().map(|(k, c)| c * ((k as f64) * scale * x).cos()).sum::<f64>()
        }).unwrap();
        let total = integrate(&laplacian(&f, &m).unwrap(), &m).unwrap();
        prop_assert!(total.abs() < 1e-10, "{total}");
    }

    #[test]
    fn constant_invariants(n in 1usize..7, p in 1.01f64..5.0, b in 1.0f64..8.0) {
        let g = constants(n, p, b, Variant::GeneralB).unwrap();
        prop_assert!(g.alpha > 0.0 && g.alpha < 1.0);
        prop_assert!(g.d >= b / 2.0 && g.d >= b * g.alpha);
        prop_assert!(g.c0 >= 0.0);
        let s = constants(n, p, 2.0, Variant::SharpB2).unwrap();
        let g2 = constants(n, p, 2.0, Variant::GeneralB).unwrap();
        prop_assert_eq!((s.alpha, s.d), (g2.alpha, g2.d));
        prop_assert_eq!(g2.curvature_coefficient(), 0.0);
        let lim = constants(n, p, 1.0, Variant::BOneLimit).unwrap();
        let bounded = constants(n, p, 1.0, Variant::BOneBoundedGradient).unwrap();
        prop_assert!(bounded.d <= lim.d);
    }

    #[test]
    fn parse_config_never_panics(text in "\\PC{0,400}") {
        let _ = parse_config(&text);
    }

    #[test]
    fn parse_config_reports_every_issue(lines in prop::collection::vec("[a-z_]{1,10} = [0-9a-z.,-]{0,8}", 0..12)) {
        let text = format!("[pme]\n{}\n", lines.join("\n"));
        if let Err(e) = parse_config(&text) {
            prop_assert!(!e.issues.is_empty());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mass_is_conserved(kind in 0u8..3, amplitude in 0.0f64..0.5, mode in 1u32..4, p in 1.2f64..3.0) {
        let m = manifold(kind, 32, 0.2);
        let params = PmeParams::new(p, InitialData::CosineBump { base: 1.0, amplitude, mode }, 0.02, 1e-3);
        let traj = run(&params, &m).unwrap();
        prop_assert!(max_relative_mass_drift(&traj).unwrap() < 1e-10);
    }

    #[test]
    fn random_curves_are_deterministic(seed in any::<u64>(), index in 0u64..1000) {
        let m = manifold(0, 32, 0.0);
        let params = PmeParams::new(2.0, InitialData::CosineBump { base: 1.0, amplitude: 0.2, mode: 1 }, 0.1, 0.01);
        let traj = run(&params, &m).unwrap();
        let a = SpaceTimeCurve::random(&traj, seed, index, 0.005).unwrap();
        prop_assert_eq!(&a, &SpaceTimeCurve::random(&traj, seed, index, 0.005).unwrap());
        prop_assert!(a.knots.len() >= 2 && a.knots.len() <= 5);
        prop_assert!(a.t1() < a.t2() && a.t1() >= 0.005 - 1e-12);
    }
}
