//! Laplacian, gradient and curvature on the three model manifolds, checked
//! against closed forms as the grid is refined.

use pme_ricci::geometry::{gradient_norm_sq, integrate, laplacian, scalar_curvature, ManifoldState};

fn max_err(m: &ManifoldState, got: &[f64], want: impl Fn(f64) -> f64) -> f64 {
    got.iter().zip(m.coordinates()).map(|(g, x)| (g - want(x)).abs()).fold(0.0, f64::max)
}

fn main() -> pme_ricci::Result<()> {
    // phi = A P2(cos theta) has Delta_0 phi = -6 phi
    let a = 0.2;
    let phi = move |th: f64| a * (3.0 * th.cos().powi(2) - 1.0) / 2.0;

    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "N", "torus lap", "S^3 lap", "surface R", "surface |df|");
    for cells in [32, 64, 128, 256] {
        let torus = ManifoldState::flat_torus(vec![2.0 * std::f64::consts::PI], cells)?;
        let f = torus.field_from_fn(|x| (3.0 * x).sin())?;
        let e_torus = max_err(&torus, laplacian(&f, &torus)?.values(), |x| -9.0 * (3.0 * x).sin());

        let sphere = ManifoldState::round_sphere(3, 2.0, cells)?;
        let f = sphere.field_from_fn(f64::cos)?;
        let e_sphere = max_err(&sphere, laplacian(&f, &sphere)?.values(), |th| -1.5 * th.cos());

        let surface = ManifoldState::rotsym_from_fn(cells, phi)?;
        let r = scalar_curvature(&surface);
        let e_r = max_err(&surface, r.values(), |th| 2.0 * (-2.0 * phi(th)).exp() * (1.0 + 6.0 * phi(th)));
        let f = surface.field_from_fn(f64::cos)?;
        let g = gradient_norm_sq(&f, &surface)?;
        let e_g = max_err(&surface, g.values(), |th| (-2.0 * phi(th)).exp() * th.sin().powi(2));

        println!("{cells:>6} {e_torus:>12.3e} {e_sphere:>12.3e} {e_r:>12.3e} {e_g:>12.3e}");
    }

    // Gauss-Bonnet: the total curvature of any closed surface is 8 pi.
    let surface = ManifoldState::rotsym_from_fn(128, phi)?;
    let total = integrate(&scalar_curvature(&surface), &surface)?;
    println!("int R dA = {total:.12} (8 pi = {:.12})", 8.0 * std::f64::consts::PI);
    Ok(())
}
