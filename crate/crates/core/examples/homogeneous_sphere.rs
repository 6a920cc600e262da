//! Constant initial data on a shrinking round sphere stay constant in space;
//! the solution then follows `u = (r0^2/rho^2)^{a n/2}` and the mass is
//! conserved for `a = 1`.

use pme_ricci::geometry::ManifoldState;
use pme_ricci::pme::{manufactured_run, max_relative_mass_drift, HomogeneousSolution, InitialData, PmeParams};

fn main() -> pme_ricci::Result<()> {
    for (n, r0_sq) in [(2, 1.0), (3, 2.0), (4, 3.0)] {
        let m = ManifoldState::round_sphere(n, r0_sq, 64)?;
        let t_end = 0.4 * m.extinction_time().unwrap();
        let params = PmeParams::new(2.0, InitialData::Constant { value: 1.0 }, t_end, t_end / 200.0).with_store_every(20);
        let report = manufactured_run(&params, &m, &HomogeneousSolution { u0: 1.0 })?;
        let traj = &report.trajectory;
        println!(
            "n = {n}: T = {t_end:.4}, u(T) = {:.6}, max rel error = {:.2e}, mass drift = {:.2e}",
            traj.last().u.get(0),
            report.max_relative_error,
            max_relative_mass_drift(traj)?
        );
    }
    Ok(())
}
