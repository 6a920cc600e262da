use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which global estimate the constants belong to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// The `b = 2` estimate with no curvature constant.
    SharpB2,
    /// The family in `b >= 1` with the `C0 |b - 2| R_max` correction.
    GeneralB,
    /// `b = 1` reached as a limit of the general family.
    BOneLimit,
    /// `b = 1` when `|grad v|` is bounded as well; smaller `d`.
    BOneBoundedGradient,
}

impl Variant {
    pub const ALL: [Variant; 4] =
        [Variant::SharpB2, Variant::GeneralB, Variant::BOneLimit, Variant::BOneBoundedGradient];

    pub fn name(self) -> &'static str {
        match self {
            Variant::SharpB2 => "sharp_b2",
            Variant::GeneralB => "general_b",
            Variant::BOneLimit => "b1_limit",
            Variant::BOneBoundedGradient => "b1_bounded_gradient",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.name() == s)
    }

    /// `b` is fixed by the variant except for the general family.
    pub fn fixed_b(self) -> Option<f64> {
        match self {
            Variant::SharpB2 => Some(2.0),
            Variant::GeneralB => None,
            Variant::BOneLimit | Variant::BOneBoundedGradient => Some(1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnackConstants {
    pub variant: Variant,
    pub n: usize,
    pub p: f64,
    pub b: f64,
    pub alpha: f64,
    pub d: f64,
    pub c0: f64,
    pub kappa: f64,
}

impl HarnackConstants {
    /// Coefficient of `R_max` on the right-hand side, `C0 |b - 2|`.
    pub fn curvature_coefficient(&self) -> f64 {
        self.c0 * (self.b - 2.0).abs()
    }
}

/// `kappa = n / (2 + n(p-1))`.
pub fn kappa(n: usize, p: f64) -> f64 {
    let n = n as f64;
    n / (2.0 + n * (p - 1.0))
}

/// Constants of `variant`. `b` is ignored by the variants that fix it.
pub fn constants(n: usize, p: f64, b: f64, variant: Variant) -> Result<HarnackConstants> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    let b = variant.fixed_b().unwrap_or(b);
    if !(b >= 1.0 && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("b must be at least 1, got {b}")));
    }
    let nf = n as f64;
    let q = nf * (p - 1.0);
    let (alpha, d, c0) = match variant {
        Variant::SharpB2 => {
            let alpha = q / (1.0 + q);
            (alpha, (2.0 * alpha).max(1.0), 0.0)
        }
        Variant::GeneralB => {
            let alpha = b * q / (2.0 + b * q);
            let c0 = if b >= 2.0 {
                2.0 * alpha / nf + (b * alpha * (p - 1.0) / 2.0).sqrt()
            } else {
                (b * alpha * (p - 1.0) * (nf - 1.0) / (2.0 * nf)).sqrt()
            };
            (alpha, (b * alpha).max(b / 2.0), c0)
        }
        Variant::BOneLimit | Variant::BOneBoundedGradient => {
            let alpha = q / (2.0 + q);
            let c0 = (alpha * (p - 1.0) * (nf - 1.0) / (2.0 * nf)).sqrt();
            let d = if variant == Variant::BOneLimit { alpha.max(0.5) } else { alpha };
            (alpha, d, c0)
        }
    };
    Ok(HarnackConstants { variant, n, p, b, alpha, d, c0, kappa: kappa(n, p) })
}
