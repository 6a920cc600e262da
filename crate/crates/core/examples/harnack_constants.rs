//! Constants of the four global estimates over a few dimensions and
//! exponents. The general family at `b = 2` reproduces the sharp estimate.

use pme_ricci::harnack::{constants, Variant};

fn main() -> pme_ricci::Result<()> {
    println!("{:<22} {:>3} {:>5} {:>5} {:>10} {:>10} {:>10}", "variant", "n", "p", "b", "alpha", "d", "C0");
    for (n, p) in [(2, 2.0), (3, 1.5), (4, 3.0)] {
        for variant in Variant::ALL {
            let bs: Vec<f64> = match variant.fixed_b() {
                Some(b) => vec![b],
                None => vec![1.5, 2.0, 3.0],
            };
            for b in bs {
                let c = constants(n, p, b, variant)?;
                println!(
                    "{:<22} {n:>3} {p:>5} {b:>5} {:>10.6} {:>10.6} {:>10.6}",
                    variant.name(),
                    c.alpha,
                    c.d,
                    c.c0
                );
            }
        }
        let sharp = constants(n, p, 2.0, Variant::SharpB2)?;
        let general = constants(n, p, 2.0, Variant::GeneralB)?;
        assert_eq!((sharp.alpha, sharp.d), (general.alpha, general.d));
    }
    Ok(())
}
