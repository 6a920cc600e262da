//! Barenblatt profiles on flat `R^n`, the equality case of the classical
//! estimate `Delta v >= -kappa / t`.

use serde::{Deserialize, Serialize};

use super::constants::kappa;
use crate::error::{Error, Result};

/// `u = t^{-kappa} (C - k r^2 t^{-2 beta})_+^{1/(p-1)}` with
/// `beta = kappa / n` and `k = kappa (p-1) / (2 p n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Barenblatt {
    pub n: usize,
    pub p: f64,
    pub c: f64,
}

impl Barenblatt {
    pub fn new(n: usize, p: f64, c: f64) -> Result<Self> {
        if n == 0 || !(p > 1.0) || !(c > 0.0) {
            return Err(Error::InvalidParameter(format!("Barenblatt needs n >= 1, p > 1, C > 0; got {n}, {p}, {c}")));
        }
        Ok(Barenblatt { n, p, c })
    }

    pub fn kappa(&self) -> f64 {
        kappa(self.n, self.p)
    }

    pub fn beta(&self) -> f64 {
        self.kappa() / self.n as f64
    }

    pub fn k(&self) -> f64 {
        self.kappa() * (self.p - 1.0) / (2.0 * self.p * self.n as f64)
    }

    /// Radius of the support at time `t`.
    pub fn support_radius(&self, t: f64) -> f64 {
        (self.c * t.powf(2.0 * self.beta()) / self.k()).sqrt()
    }

    pub fn density(&self, r: f64, t: f64) -> f64 {
        let inner = (self.c - self.k() * r * r * t.powf(-2.0 * self.beta())).max(0.0);
        t.powf(-self.kappa()) * inner.powf(1.0 / (self.p - 1.0))
    }

    /// `p/(p-1) u^{p-1}`, quadratic in `r` on the support.
    pub fn pressure(&self, r: f64, t: f64) -> f64 {
        let p = self.p;
        let inner = (self.c - self.k() * r * r * t.powf(-2.0 * self.beta())).max(0.0);
        p / (p - 1.0) * t.powf(-self.kappa() * (p - 1.0)) * inner
    }
}

/// Largest `|Delta v + kappa/t|` over the inner half of the support, with the
/// radial Laplacian `v_rr + (n-1) v_r / r` taken by centered differences on
/// `cells` intervals (`n v_rr` at the origin).
pub fn classical_ab_check(profile: &Barenblatt, t: f64, cells: usize) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    if cells < 4 {
        return Err(Error::InvalidParameter("need at least 4 cells".into()));
    }
    let half = 0.5 * profile.support_radius(t);
    let h = half / cells as f64;
    let v = |r: f64| profile.pressure(r, t);
    let n = profile.n as f64;
    let target = -profile.kappa() / t;
    let mut worst: f64 = 0.0;
    for i in 0..=cells {
        let r = i as f64 * h;
        // even extension through the origin
        let (vm, v0, vp) = (v((r - h).abs()), v(r), v(r + h));
        let v_rr = (vp - 2.0 * v0 + vm) / (h * h);
        let lap = if i == 0 { n * v_rr } else { v_rr + (n - 1.0) * (vp - vm) / (2.0 * h * r) };
        worst = worst.max((lap - target).abs());
    }
    Ok(worst)
}
