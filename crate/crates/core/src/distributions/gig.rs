//! Generalized inverse Gaussian variates.
//!
//! Density `(a/b)^{p/2} / (2 K_p(sqrt(ab))) x^{p-1} exp(-(a x + b / x) / 2)`.
//!
//! `p = +-1/2` goes through the inverse Gaussian. Other orders use the
//! generators of Hormann and Leydold (2014): ratio-of-uniforms with or
//! without mode shift, or a piecewise constant/power/exponential hat for the
//! region where the density is not T-concave.

use super::{sample_gamma, sample_inverse_gamma, sample_inverse_gaussian, RngStream};
use crate::error::{domain, Result};
use crate::special::ln_bessel_k;

/// Parameters of a GIG law. `b = 0` with `p > 0` is the gamma limit and
/// `a = 0` with `p < 0` the inverse gamma limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GigParams {
    pub a: f64,
    pub b: f64,
    pub p: f64,
}

impl GigParams {
    pub fn new(a: f64, b: f64, p: f64) -> Result<Self> {
        let params = Self { a, b, p };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { a, b, p } = *self;
        if !(a.is_finite() && b.is_finite() && p.is_finite()) {
            return domain(format!("GIG parameters must be finite: a={a}, b={b}, p={p}"));
        }
        let ok = (a > 0.0 && b > 0.0) || (a > 0.0 && b == 0.0 && p > 0.0) || (a == 0.0 && b > 0.0 && p < 0.0);
        if ok {
            Ok(())
        } else {
            domain(format!("invalid GIG parameters a={a}, b={b}, p={p}"))
        }
    }

    /// `E[X] = sqrt(b/a) K_{p+1}(w) / K_p(w)` with `w = sqrt(ab)`.
    pub fn mean(&self) -> Result<f64> {
        self.validate()?;
        if self.b == 0.0 {
            return Ok(2.0 * self.p / self.a);
        }
        if self.a == 0.0 {
            let shape = -self.p;
            if shape <= 1.0 {
                return Ok(f64::INFINITY);
            }
            return Ok(self.b / 2.0 / (shape - 1.0));
        }
        let w = (self.a * self.b).sqrt();
        Ok((self.b / self.a).sqrt() * (ln_bessel_k(self.p + 1.0, w)? - ln_bessel_k(self.p, w)?).exp())
    }

    /// Log density; `-inf` outside the support.
    pub fn log_density(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if !(x > 0.0) {
            return Ok(f64::NEG_INFINITY);
        }
        let Self { a, b, p } = *self;
        let log_norm = if b == 0.0 {
            // Gamma(p, rate a/2).
            p * (0.5 * a).ln() - statrs::function::gamma::ln_gamma(p)
        } else if a == 0.0 {
            // Inverse gamma(-p, scale b/2).
            -p * (0.5 * b).ln() - statrs::function::gamma::ln_gamma(-p)
        } else {
            0.5 * p * (a / b).ln() - std::f64::consts::LN_2 - ln_bessel_k(p, (a * b).sqrt())?
        };
        Ok(log_norm + (p - 1.0) * x.ln() - 0.5 * (a * x + b / x))
    }
}

/// Draws from `GIG(a, b, p)`.
pub fn sample_gig(params: GigParams, rng: &mut RngStream) -> Result<f64> {
    params.validate()?;
    let GigParams { a, b, p } = params;
    if b == 0.0 {
        return sample_gamma(p, 0.5 * a, rng);
    }
    if a == 0.0 {
        return sample_inverse_gamma(-p, 0.5 * b, rng);
    }
    if p == 0.5 {
        // GIG(a, b, 1/2) = 1 / GIG(b, a, -1/2) = 1 / IG(sqrt(a/b), a).
        return Ok(1.0 / sample_inverse_gaussian((a / b).sqrt(), a, rng)?);
    }
    if p == -0.5 {
        return sample_inverse_gaussian((b / a).sqrt(), b, rng);
    }
    let omega = (a * b).sqrt();
    let scale = (b / a).sqrt();
    let lambda = p.abs();
    let x = if lambda > 2.0 || omega > 3.0 {
        rou_shifted(lambda, omega, rng)
    } else if lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2 {
        rou_unshifted(lambda, omega, rng)
    } else {
        concave_hat(lambda, omega, rng)
    };
    // For negative order X ~ GIG(omega, omega, |p|) and 1/X has order p.
    Ok(if p < 0.0 { scale / x } else { scale * x })
}

fn mode(lambda: f64, omega: f64) -> f64 {
    if lambda >= 1.0 {
        ((lambda - 1.0).hypot(omega) + (lambda - 1.0)) / omega
    } else {
        omega / ((1.0 - lambda).hypot(omega) + (1.0 - lambda))
    }
}

/// Log of the unnormalized square-root density for the standardized law.
#[inline]
fn log_sqrt_kernel(x: f64, t: f64, s: f64) -> f64 {
    t * x.ln() - s * (x + 1.0 / x)
}

fn rou_unshifted(lambda: f64, omega: f64, rng: &mut RngStream) -> f64 {
    let t = 0.5 * (lambda - 1.0);
    let s = 0.25 * omega;
    let xm = mode(lambda, omega);
    let nc = log_sqrt_kernel(xm, t, s);
    let ym = ((lambda + 1.0) + (lambda + 1.0).hypot(omega)) / omega;
    let um = (0.5 * (lambda + 1.0) * ym.ln() - s * (ym + 1.0 / ym) - nc).exp();
    loop {
        let u = um * rng.open01();
        let v = rng.open01();
        let x = u / v;
        if v.ln() <= log_sqrt_kernel(x, t, s) - nc {
            return x;
        }
    }
}

fn rou_shifted(lambda: f64, omega: f64, rng: &mut RngStream) -> f64 {
    let t = 0.5 * (lambda - 1.0);
    let s = 0.25 * omega;
    let xm = mode(lambda, omega);
    let nc = log_sqrt_kernel(xm, t, s);

    // Bounding rectangle from the roots of a cubic, by Cardano's formula.
    let a = -(2.0 * (lambda + 1.0) / omega + xm);
    let b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
    let c = xm;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let phi = (-q / (2.0 * (-(p * p * p) / 27.0).sqrt())).acos();
    let fak = 2.0 * (-p / 3.0).sqrt();
    let y1 = fak * (phi / 3.0).cos() - a / 3.0;
    let y2 = fak * (phi / 3.0 + 4.0 / 3.0 * std::f64::consts::PI).cos() - a / 3.0;
    let u_plus = (y1 - xm) * (log_sqrt_kernel(y1, t, s) - nc).exp();
    let u_minus = (y2 - xm) * (log_sqrt_kernel(y2, t, s) - nc).exp();

    loop {
        let u = u_minus + rng.open01() * (u_plus - u_minus);
        let v = rng.open01();
        let x = u / v + xm;
        if x > 0.0 && v.ln() <= log_sqrt_kernel(x, t, s) - nc {
            return x;
        }
    }
}

/// Valid for `0 <= lambda < 1` and `omega <= 1`.
fn concave_hat(lambda: f64, omega: f64, rng: &mut RngStream) -> f64 {
    let xm = mode(lambda, omega);
    let x0 = omega / (1.0 - lambda);
    let k0 = ((lambda - 1.0) * xm.ln() - 0.5 * omega * (xm + 1.0 / xm)).exp();
    let area0 = k0 * x0;
    let (k1, area1, k2, area2);
    if x0 >= 2.0 / omega {
        k1 = 0.0;
        area1 = 0.0;
        k2 = x0.powf(lambda - 1.0);
        area2 = k2 * 2.0 * (-omega * x0 / 2.0).exp() / omega;
    } else {
        k1 = (-omega).exp();
        area1 = if lambda == 0.0 {
            k1 * (2.0 / (omega * omega)).ln()
        } else {
            k1 / lambda * ((2.0 / omega).powf(lambda) - x0.powf(lambda))
        };
        k2 = (2.0 / omega).powf(lambda - 1.0);
        area2 = k2 * 2.0 * (-1.0f64).exp() / omega;
    }
    let total = area0 + area1 + area2;

    loop {
        let mut v = total * rng.open01();
        let (x, hx);
        if v <= area0 {
            x = x0 * v / area0;
            hx = k0;
        } else {
            v -= area0;
            if v <= area1 {
                if lambda == 0.0 {
                    x = omega * (omega.exp() * v).exp();
                    hx = k1 / x;
                } else {
                    x = (x0.powf(lambda) + lambda / k1 * v).powf(1.0 / lambda);
                    hx = k1 * x.powf(lambda - 1.0);
                }
            } else {
                v -= area1;
                let left = x0.max(2.0 / omega);
                x = -2.0 / omega * ((-omega / 2.0 * left).exp() - omega / (2.0 * k2) * v).ln();
                hx = k2 * (-omega / 2.0 * x).exp();
            }
        }
        let u = rng.open01() * hx;
        if u.ln() <= (lambda - 1.0) * x.ln() - 0.5 * omega * (x + 1.0 / x) {
            return x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_of(params: GigParams, n: usize, seed: u64) -> (f64, f64) {
        let mut rng = RngStream::new(seed, 0);
        let xs: Vec<f64> = (0..n).map(|_| sample_gig(params, &mut rng).unwrap()).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        (m, (v / n as f64).sqrt())
    }

    #[test]
    fn moments_across_branches() {
        // One case per generator branch plus both signs of the order.
        let cases = [
            (2.0, 2.0, 1.0),
            (0.01, 0.01, 0.3),
            (0.01, 0.01, 0.0),
            (1.0, 1.0, 0.5),
            (2.0, 8.0, -0.5),
            (25.0, 1.0, 3.0),
            (0.5, 0.5, 3.0),
            (3.0, 0.2, -1.7),
            (0.04, 0.04, -0.2),
        ];
        for (i, &(a, b, p)) in cases.iter().enumerate() {
            let params = GigParams::new(a, b, p).unwrap();
            let want = params.mean().unwrap();
            let (got, se) = mean_of(params, 100_000, 11 + i as u64);
            assert!((got - want).abs() < 4.0 * se, "case {i}: got {got} want {want} se {se}");
        }
    }

    #[test]
    fn gamma_limit() {
        let params = GigParams::new(2.0, 0.0, 1.0).unwrap();
        assert_eq!(params.mean().unwrap(), 1.0);
        let (m, se) = mean_of(params, 100_000, 5);
        assert!((m - 1.0).abs() < 3.0 * se);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GigParams::new(-1.0, 1.0, 0.5).is_err());
        assert!(GigParams::new(1.0, 0.0, -0.5).is_err());
        assert!(GigParams::new(0.0, 0.0, 1.0).is_err());
        assert!(GigParams::new(1.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn log_density_normalizes_on_a_grid() {
        let params = GigParams::new(2.0, 3.0, 1.0).unwrap();
        let h = 1e-3;
        let total: f64 = (1..40_000).map(|i| params.log_density(i as f64 * h).unwrap().exp() * h).sum();
        assert!((total - 1.0).abs() < 1e-5, "{total}");
    }
}
