//! Worst margins of the global estimates on a bump under Ricci flow of the
//! round sphere, with the worst margin at each stored time for `b = 2`.

use pme_ricci::geometry::ManifoldState;
use pme_ricci::harnack::{constants, default_t_min, margin_series, theorem_margin, Variant, TOL_INEQ};
use pme_ricci::pme::{run, InitialData, PmeParams};

fn main() -> pme_ricci::Result<()> {
    let m = ManifoldState::round_sphere(2, 1.0, 128)?;
    let params = PmeParams::new(2.0, InitialData::CosineBump { base: 1.0, amplitude: 0.3, mode: 1 }, 0.2, 1e-4)
        .with_store_every(40);
    let traj = run(&params, &m)?;
    let t_min = default_t_min(&traj);

    let mut checks = vec![constants(2, 2.0, 2.0, Variant::SharpB2)?];
    for b in [1.5, 3.0, 5.0] {
        checks.push(constants(2, 2.0, b, Variant::GeneralB)?);
    }
    checks.push(constants(2, 2.0, 1.0, Variant::BOneLimit)?);
    for c in &checks {
        let r = theorem_margin(&traj, c, t_min, TOL_INEQ)?;
        println!(
            "{:<24} worst {:>10.4} at theta = {:.3}, t = {:.4}  {}",
            r.estimate,
            r.worst_margin,
            r.location.coordinate,
            r.location.t,
            if r.pass { "ok" } else { "FAIL" }
        );
    }

    println!("\nworst margin over the sphere, b = 2:");
    for (s, m) in traj.states.iter().zip(margin_series(&traj, &checks[0])?).step_by(5) {
        if let Some(m) = m {
            println!("  t = {:.4}  {m:>10.4}", s.time());
        }
    }
    Ok(())
}
