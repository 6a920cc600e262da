//! Residuals of the evolution identities under `h -> h/2`, `dt -> dt/4` on
//! a bump over a flat torus. The stencils are second order in space, so the
//! measured orders approach 2.

use pme_ricci::geometry::ManifoldState;
use pme_ricci::identities::{
    assign_orders, bochner_residual, f_evolution_residual, f_rearranged_residual, quotient_rule_residual,
    yz_decomposition_check, IdentityResidual,
};
use pme_ricci::pme::{run, InitialData, PmeParams, Trajectory};

fn level(cells: usize) -> pme_ricci::Result<Trajectory> {
    let k = (cells / 32) * (cells / 32);
    let m = ManifoldState::flat_torus(vec![2.0 * std::f64::consts::PI], cells)?;
    let params = PmeParams::new(2.0, InitialData::CosineBump { base: 1.0, amplitude: 0.2, mode: 1 }, 0.1, 1e-3 / k as f64)
        .with_store_every(2 * k);
    run(&params, &m)
}

fn print(mut levels: Vec<IdentityResidual>) {
    assign_orders(&mut levels);
    let name = levels[0].id.clone();
    let cells: Vec<String> = levels
        .iter()
        .map(|l| format!("{:.2e}{}", l.max_abs_residual, l.measured_order.map_or(String::new(), |o| format!(" ({o:.2})"))))
        .collect();
    println!("{name:<16} {}", cells.join("   "));
}

fn main() -> pme_ricci::Result<()> {
    let trajs: Vec<Trajectory> = [32, 64, 128].into_iter().map(level).collect::<Result<_, _>>()?;
    print(trajs.iter().map(|t| f_evolution_residual(t, 1.0, 2.0, -1.0)).collect::<Result<_, _>>()?);
    print(trajs.iter().map(|t| f_evolution_residual(t, 1.0, 3.0, 0.5)).collect::<Result<_, _>>()?);
    print(trajs.iter().map(|t| f_rearranged_residual(t, 1.5)).collect::<Result<_, _>>()?);
    print(
        trajs
            .iter()
            .map(|t| {
                let f: Vec<_> = t.states.iter().map(|s| s.v.map(|x| x * x)).collect();
                let g: Vec<_> = t.states.iter().map(|s| s.u.clone()).collect();
                quotient_rule_residual(&f, &g, t)
            })
            .collect::<Result<_, _>>()?,
    );
    print(trajs.iter().map(|t| bochner_residual(&t.states[t.len() / 2].v, &t.states[0].manifold)).collect::<Result<_, _>>()?);
    let yz = yz_decomposition_check(&trajs[0], 2.0)?;
    println!("y - b z split: {:.1e} (roundoff)", yz.decomposition.max_abs_residual);
    Ok(())
}
