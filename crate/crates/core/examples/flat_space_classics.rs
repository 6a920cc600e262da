//! The classical flat-space estimates: Barenblatt profiles attain
//! `Delta v = -kappa/t`, and on a static torus the weighted estimate with
//! `alpha > 1` holds with room to spare.

use pme_ricci::geometry::ManifoldState;
use pme_ricci::harnack::{classical_ab_check, default_t_min, lnvv_check, Barenblatt, TOL_INEQ};
use pme_ricci::pme::{run, InitialData, PmeParams};

fn main() -> pme_ricci::Result<()> {
    for (n, p) in [(1, 2.0), (2, 1.5), (3, 3.0)] {
        let profile = Barenblatt::new(n, p, 1.0)?;
        for t in [0.5, 1.0, 2.0] {
            let err = classical_ab_check(&profile, t, 64)?;
            println!(
                "n = {n}, p = {p}, t = {t}: support {:.4}, max |Delta v + kappa/t| = {err:.2e}",
                profile.support_radius(t)
            );
        }
    }

    let m = ManifoldState::flat_torus(vec![2.0 * std::f64::consts::PI], 128)?;
    let params = PmeParams::new(2.0, InitialData::CosineBump { base: 1.0, amplitude: 0.5, mode: 2 }, 1.0, 1e-3)
        .with_store_every(10);
    let traj = run(&params, &m)?;
    for alpha in [1.1, 1.5, 2.0, 4.0] {
        let r = lnvv_check(&traj, alpha, default_t_min(&traj), TOL_INEQ)?;
        println!("{}: worst margin {:.4} at t = {:.3}", r.estimate, r.worst_margin, r.location.t);
    }
    Ok(())
}
