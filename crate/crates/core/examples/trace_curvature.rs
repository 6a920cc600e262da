//! The trace curvature quantity along `V = -grad v` on a nonnegatively
//! curved surface, and on the dumbbell where the curvature hypothesis fails.

use pme_ricci::geometry::ManifoldState;
use pme_ricci::harnack::{lyh_check, TOL_INEQ};
use pme_ricci::pme::{run, InitialData, PmeParams};

fn main() -> pme_ricci::Result<()> {
    for amplitude in [0.0, 0.05, 0.5] {
        let m = ManifoldState::rotsym_from_fn(64, |th| amplitude * (3.0 * th.cos().powi(2) - 1.0) / 2.0)?;
        let params = PmeParams::new(2.0, InitialData::CosineBump { base: 1.0, amplitude: 0.2, mode: 2 }, 0.1, 1e-4)
            .with_store_every(20);
        let r = lyh_check(&run(&params, &m)?, TOL_INEQ)?;
        println!(
            "profile amplitude {amplitude}: min Q = {:.4e} at theta = {:.3}, t = {:.3}, hypotheses {}",
            -r.worst_margin,
            r.location.coordinate,
            r.location.t,
            if r.valid { "hold" } else { "fail" }
        );
    }
    Ok(())
}
