//! Modified Bessel function of the second kind, `K_nu(x)`, for real order
//! and positive argument.
//!
//! The order is reduced to `mu = nu - N` with `|mu| <= 1/2`. `K_mu` and
//! `K_{mu+1}` come from Temme's series when `x <= 2` and from Steed's
//! continued fraction (CF2) otherwise; both produce the exponentially scaled
//! values `e^x K`. Forward recurrence then reaches `nu`, rescaling as it
//! goes so that the logarithm stays available when the value itself would
//! overflow.

#![allow(clippy::excessive_precision)]

use crate::error::{domain, Result};

/// `K_nu(x)` in both log and exponentially scaled form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselResult {
    /// `ln K_nu(x)`.
    pub log_value: f64,
    /// `e^x K_nu(x)`; `+inf` when it does not fit in a double.
    pub scaled_value: f64,
}

impl BesselResult {
    /// `K_nu(x)` itself. Underflows to zero for large `x`.
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

/// Crossover between the series and continued-fraction regions.
const SERIES_MAX_X: f64 = 2.0;

const G1_COEFFS: [f64; 14] = [
    -1.145_164_083_662_683_1,
    0.006_360_853_113_470_843,
    0.001_862_451_930_072_068_5,
    0.000_152_833_085_873_453_5,
    0.000_017_017_464_011_802_04,
    -6.459_750_292_334_725e-7,
    -5.181_984_843_251_938e-8,
    4.518_909_289_485_818e-10,
    3.243_322_737_102_087_3e-11,
    6.830_943_402_494_752e-13,
    2.835_350_275_517_21e-14,
    -7.988_390_576_932_359e-16,
    -3.372_667_730_077_195e-17,
    -3.658_633_480_921_052e-20,
];

const G2_COEFFS: [f64; 15] = [
    1.882_645_524_949_671_8,
    -0.077_490_658_396_167_52,
    -0.018_256_714_847_324_93,
    0.000_633_803_020_907_489_6,
    0.000_076_229_054_350_872_9,
    -9.550_164_756_172_044e-7,
    -8.892_726_810_788_635e-8,
    -1.952_133_477_231_961_4e-9,
    -9.400_305_273_588_516e-11,
    4.687_513_384_953_239e-12,
    2.265_853_574_692_576e-13,
    -1.172_550_969_848_801_5e-15,
    -7.044_133_820_024_522e-17,
    -2.437_787_831_010_769_3e-18,
    -7.522_524_321_825_39e-20,
];

fn chebyshev(coeffs: &[f64], x: f64) -> f64 {
    let y2 = 2.0 * x;
    let (mut d, mut dd) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let tmp = d;
        d = y2 * d - dd + c;
        dd = tmp;
    }
    x * d - dd + 0.5 * coeffs[0]
}

/// Returns `(Gamma(1+mu), Gamma(1-mu), g1, g2)` with Temme's auxiliary
/// functions `g1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)` and
/// `g2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2`, valid for `|mu| <= 1/2`.
fn temme_gamma(mu: f64) -> (f64, f64, f64, f64) {
    let t = 4.0 * mu.abs() - 1.0;
    let g1 = chebyshev(&G1_COEFFS, t);
    let g2 = chebyshev(&G2_COEFFS, t);
    (1.0 / (g2 - mu * g1), 1.0 / (g2 + mu * g1), g1, g2)
}

/// Scaled `(K_mu, K_{mu+1})` by Temme's series, `|mu| <= 1/2`, `0 < x <= 2`.
fn scaled_temme(mu: f64, x: f64) -> (f64, f64) {
    let half_x = 0.5 * x;
    let ln_half_x = half_x.ln();
    let half_x_mu = (mu * ln_half_x).exp();
    let pi_mu = std::f64::consts::PI * mu;
    let sigma = -mu * ln_half_x;
    let sin_ratio = if pi_mu.abs() < f64::EPSILON { 1.0 } else { pi_mu / pi_mu.sin() };
    let sinh_ratio = if sigma.abs() < f64::EPSILON { 1.0 } else { sigma.sinh() / sigma };
    let (gamma_1p, gamma_1m, g1, g2) = temme_gamma(mu);

    let mut fk = sin_ratio * (sigma.cosh() * g1 - sinh_ratio * ln_half_x * g2);
    let mut pk = 0.5 / half_x_mu * gamma_1p;
    let mut qk = 0.5 * half_x_mu * gamma_1m;
    let mut ck = 1.0;
    let mut sum0 = fk;
    let mut sum1 = pk;
    for k in 1..=15_000 {
        let k = k as f64;
        fk = (k * fk + pk + qk) / (k * k - mu * mu);
        ck *= half_x * half_x / k;
        pk /= k - mu;
        qk /= k + mu;
        let hk = -k * fk + pk;
        let del0 = ck * fk;
        sum0 += del0;
        sum1 += ck * hk;
        if del0.abs() < 0.5 * sum0.abs() * f64::EPSILON {
            break;
        }
    }
    let ex = x.exp();
    (sum0 * ex, sum1 * 2.0 / x * ex)
}

/// Scaled `(K_mu, K_{mu+1})` by Steed's method for CF2, `|mu| <= 1/2`, `x > 2`.
fn scaled_steed_cf2(mu: f64, x: f64) -> (f64, f64) {
    let mut bi = 2.0 * (1.0 + x);
    let mut di = 1.0 / bi;
    let mut delhi = di;
    let mut hi = di;
    let mut qi = 0.0;
    let mut qip1 = 1.0;
    let mut ai = -(0.25 - mu * mu);
    let a1 = ai;
    let mut ci = -ai;
    let mut bqi = -ai;
    let mut s = 1.0 + bqi * delhi;
    for i in 2..=10_000 {
        ai -= 2.0 * (i - 1) as f64;
        ci = -ai * ci / i as f64;
        let tmp = (qi - bi * qip1) / ai;
        qi = qip1;
        qip1 = tmp;
        bqi += ci * qip1;
        bi += 2.0;
        di = 1.0 / (bi + ai * di);
        delhi *= bi * di - 1.0;
        hi += delhi;
        let dels = bqi * delhi;
        s += dels;
        if (dels / s).abs() < f64::EPSILON {
            break;
        }
    }
    hi *= -a1;
    let k_mu = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
    let k_mu1 = k_mu * (mu + x + 0.5 - hi) / x;
    (k_mu, k_mu1)
}

/// Evaluates `K_nu(x)`. Negative orders are accepted through the symmetry
/// `K_{-nu} = K_nu`.
pub fn bessel_k(nu: f64, x: f64) -> Result<BesselResult> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("bessel_k requires finite x > 0, got {x}"));
    }
    if !nu.is_finite() {
        return domain(format!("bessel_k requires a finite order, got {nu}"));
    }
    let nu = nu.abs();
    let steps = (nu + 0.5).floor();
    let mu = nu - steps;
    let (mut k_cur, mut k_next) = if x <= SERIES_MAX_X { scaled_temme(mu, x) } else { scaled_steed_cf2(mu, x) };
    // ln of the factor divided out of (k_cur, k_next) during recurrence.
    let mut log_shift = 0.0;
    for n in 0..steps as usize {
        let k_prev = k_cur;
        k_cur = k_next;
        k_next = 2.0 * (mu + n as f64 + 1.0) / x * k_cur + k_prev;
        if k_next > 1e250 {
            k_cur *= 1e-250;
            k_next *= 1e-250;
            log_shift += 250.0 * std::f64::consts::LN_10;
        }
    }
    let log_scaled = k_cur.ln() + log_shift;
    Ok(BesselResult { log_value: log_scaled - x, scaled_value: log_scaled.exp() })
}

/// `ln K_nu(x)`; convenience for hot paths that only need the log.
pub fn ln_bessel_k(nu: f64, x: f64) -> Result<f64> {
    bessel_k(nu, x).map(|r| r.log_value)
}
