//! Integrated inequalities along space-time curves: a constant curve, the
//! meridian geodesic between the poles, seeded random curves, and the
//! lattice lower bound on the action.

use pme_ricci::geometry::ManifoldState;
use pme_ricci::harnack::{
    constants, curve_action, default_t_min, lattice_action, path_harnack_check, path_sweep, Anchor, PathForm,
    SpaceTimeCurve, Variant, PATH_TOLERANCE,
};
use pme_ricci::pme::{run, InitialData, PmeParams};

fn main() -> pme_ricci::Result<()> {
    let m = ManifoldState::round_sphere(2, 1.0, 64)?;
    let params = PmeParams::new(2.0, InitialData::CosineBump { base: 1.0, amplitude: 0.3, mode: 1 }, 0.2, 1e-4)
        .with_store_every(50);
    let traj = run(&params, &m)?;
    let last = traj.len() - 1;
    let c = constants(2, 2.0, 2.0, Variant::SharpB2)?;

    let curves = [
        ("constant at the equator", SpaceTimeCurve::constant(&traj, 32, 4, last)?),
        ("pole to pole", SpaceTimeCurve::geodesic(&traj, Anchor { node: 0, state: 4 }, Anchor { node: 64, state: last })?),
    ];
    for (label, curve) in &curves {
        println!("{label}: action {:.5}", curve_action(&traj, curve, c.b));
        for form in [PathForm::Multiplicative, PathForm::Additive] {
            let r = path_harnack_check(&traj, &c, curve, form)?;
            println!("  {form:?}: v1 = {:.4}, v2 = {:.4}, slack {:.5}", r.v1, r.v2, r.slack);
        }
    }

    let lattice = lattice_action(&traj, c.b, Anchor { node: 0, state: 4 }, Anchor { node: 64, state: last })?;
    println!("lattice action pole to pole: {lattice:.5}");

    for b in [1.5, 2.0, 3.0] {
        let c = constants(2, 2.0, b, Variant::GeneralB)?;
        let sweep = path_sweep(&traj, &c, 7, 200, default_t_min(&traj), PATH_TOLERANCE)?;
        println!(
            "b = {b}: {} random curves, least slack {:.4} (multiplicative), {:.4} (additive)",
            sweep.curves, -sweep.multiplicative.worst_margin, -sweep.additive.worst_margin
        );
    }
    Ok(())
}
