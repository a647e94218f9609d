//! Losses, the scaled pseudo-Huber error density, and its Gaussian
//! scale-mixture generator.

use serde::{Deserialize, Serialize};

use crate::distributions::{sample_gig, standard_normal, GigParams, RngStream};
use crate::error::{domain, Result};
use crate::special::ln_bessel_k;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// Scaled pseudo-Huber.
    Sph,
    /// Pseudo-Huber without the `sqrt(1 + alpha^-2)` rescaling.
    UnscaledPh,
    Huber,
    L1,
    L2,
}

impl LossKind {
    pub fn uses_alpha(self) -> bool {
        matches!(self, LossKind::Sph | LossKind::UnscaledPh | LossKind::Huber)
    }

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Sph => "sph",
            LossKind::UnscaledPh => "unscaled_ph",
            LossKind::Huber => "huber",
            LossKind::L1 => "l1",
            LossKind::L2 => "l2",
        }
    }
}

impl std::str::FromStr for LossKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sph" => Ok(LossKind::Sph),
            "unscaled_ph" | "ph" => Ok(LossKind::UnscaledPh),
            "huber" => Ok(LossKind::Huber),
            "l1" => Ok(LossKind::L1),
            "l2" => Ok(LossKind::L2),
            other => Err(crate::Error::Input(format!("unknown loss '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossVariant {
    pub kind: LossKind,
    /// Transition parameter; ignored by `L1` and `L2`.
    pub alpha: f64,
}

impl LossVariant {
    pub fn new(kind: LossKind, alpha: f64) -> Result<Self> {
        if kind.uses_alpha() && !(alpha > 0.0 && alpha.is_finite()) {
            return domain(format!("{} loss needs alpha > 0, got {alpha}", kind.name()));
        }
        Ok(Self { kind, alpha })
    }

    pub fn loss(&self, t: f64) -> f64 {
        loss(*self, t)
    }
}

/// `sqrt(1 + t^2/a^2) - 1`, accurate when `t/a` is tiny.
#[inline]
fn root_minus_one(t: f64, a: f64) -> f64 {
    let r = t / a;
    let r2 = r * r;
    if r2.is_infinite() {
        return r.abs();
    }
    r2 / ((1.0 + r2).sqrt() + 1.0)
}

/// Evaluates the loss at residual `t`.
pub fn loss(variant: LossVariant, t: f64) -> f64 {
    let a = variant.alpha;
    match variant.kind {
        LossKind::Sph => {
            // a * sqrt(a^2 + 1) written as a^2 sqrt(1 + 1/a^2) keeps the
            // large-alpha limit t^2/2 free of overflow.
            let r = t / a;
            if r.abs() < 1e-150 || !(a * a).is_finite() {
                // a^2 (r^2/2) sqrt(1 + 1/a^2) without forming a^2.
                return 0.5 * t * t * (1.0 + 1.0 / (a * a)).sqrt();
            }
            a * (a * a + 1.0).sqrt() * root_minus_one(t, a)
        }
        LossKind::UnscaledPh => {
            let r = t / a;
            if r.abs() < 1e-150 || !(a * a).is_finite() {
                return 0.5 * t * t;
            }
            a * a * root_minus_one(t, a)
        }
        LossKind::Huber => {
            if t.abs() <= a {
                0.5 * t * t
            } else {
                a * (t.abs() - 0.5 * a)
            }
        }
        LossKind::L1 => t.abs(),
        LossKind::L2 => t * t,
    }
}

/// The normalized density `f(e | alpha)` whose negative log is the SPH loss
/// up to a constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphDensity {
    pub alpha: f64,
    pub log_norm_const: f64,
}

impl SphDensity {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return domain(format!("SPH density needs alpha > 0, got {alpha}"));
        }
        Ok(Self { alpha, log_norm_const: sph_log_norm_const(alpha)? })
    }

    pub fn log_density(&self, eps: f64) -> f64 {
        self.log_norm_const - loss(LossVariant { kind: LossKind::Sph, alpha: self.alpha }, eps)
    }

    pub fn density(&self, eps: f64) -> f64 {
        self.log_density(eps).exp()
    }
}

/// `-a sqrt(1+a^2) - ln(2a) - ln K_1(a sqrt(1+a^2))`.
pub fn sph_log_norm_const(alpha: f64) -> Result<f64> {
    let arg = alpha * (1.0 + alpha * alpha).sqrt();
    let r = crate::special::bessel_k(1.0, arg)?;
    // -arg - ln K_1(arg) = -ln(e^arg K_1(arg)).
    Ok(-(2.0 * alpha).ln() - r.scaled_value.ln())
}

/// Log density of the SPH density; convenience wrapper.
pub fn log_density(d: &SphDensity, eps: f64) -> f64 {
    d.log_density(eps)
}

/// Draws an error from the SPH density by the two-stage hierarchy
/// `lambda ~ GIG(1 + alpha^2, alpha^2, 1)`, `e | lambda ~ N(0, lambda)`.
pub fn sample_sph_error(alpha: f64, rng: &mut RngStream) -> Result<f64> {
    let a2 = alpha * alpha;
    let lambda = sample_gig(GigParams::new(1.0 + a2, a2, 1.0)?, rng)?;
    Ok(lambda.sqrt() * standard_normal(rng))
}

/// `ln K_1` shortcut used by the scale-parameter conditional.
pub(crate) fn ln_k1(x: f64) -> Result<f64> {
    ln_bessel_k(1.0, x)
}
