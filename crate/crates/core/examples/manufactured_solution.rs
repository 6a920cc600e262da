//! Spatial order of the solver on a forced decaying cosine, with the time
//! step small enough that the grid error dominates.

use pme_ricci::geometry::ManifoldState;
use pme_ricci::pme::{manufactured_run, DecayingCosine, InitialData, PmeParams};

fn main() -> pme_ricci::Result<()> {
    let exact = DecayingCosine { base: 1.0, amplitude: 0.3, wavenumber: 1.0, rate: 0.5 };
    let mut previous: Option<f64> = None;
    for cells in [16, 32, 64, 128] {
        let m = ManifoldState::flat_torus(vec![2.0 * std::f64::consts::PI], cells)?;
        let params = PmeParams::new(2.0, InitialData::Constant { value: 1.0 }, 0.5, 1e-3).with_store_every(50);
        let r = manufactured_run(&params, &m, &exact)?;
        let order = previous.map_or("-".to_string(), |p| format!("{:.2}", (p / r.max_error).log2()));
        println!("N = {cells:>3}: max error {:.3e}  order {order}", r.max_error);
        previous = Some(r.max_error);
    }
    Ok(())
}
