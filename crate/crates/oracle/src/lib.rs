//! Reference computations for the sphreg test suites.
//!
//! Everything here is deliberately naive: adaptive quadrature, dense
//! elimination, direct summation. None of it shares code with the library
//! paths it is used to check.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss-Kronrod integration of `f` over the finite
/// interval `[a, b]`. Bisects the segment with the largest error estimate
/// until the summed estimate drops below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (value, error) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    for _ in 0..20_000 {
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum to shed accumulated cancellation from the running updates.
    heap.iter().map(|s| s.value).sum()
}

/// Integral of `f` over `[a, +inf)` via the substitution `x = a + t/(1-t)`.
pub fn integrate_upper<F: Fn(f64) -> f64>(f: F, a: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    integrate(
        |t| {
            let one_minus = 1.0 - t;
            let x = a + t / one_minus;
            let v = f(x) / (one_minus * one_minus);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

/// Integral of `f` over `(-inf, b]`.
pub fn integrate_lower<F: Fn(f64) -> f64>(f: F, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    integrate_upper(|x| f(-x), -b, abs_tol, rel_tol)
}

/// `K_nu(x)` from the integral representation `int_0^inf exp(-x cosh t) cosh(nu t) dt`.
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    bessel_k_scaled(nu, x) * (-x).exp()
}

/// `exp(x) K_nu(x)` from the integral representation.
pub fn bessel_k_scaled(nu: f64, x: f64) -> f64 {
    // exp(-x (cosh t - 1)) written with expm1-free form: cosh t - 1 = 2 sinh^2(t/2).
    let integrand = |t: f64| {
        let s = (0.5 * t).sinh();
        (-2.0 * x * s * s).exp() * (nu * t).cosh()
    };
    // Past this point the integrand is below 1e-300 relative to its peak.
    let mut upper = 1.0;
    while integrand(upper) > 1e-300 * integrand(0.0).max(1.0) && upper < 800.0 {
        upper *= 1.5;
    }
    let mut pieces = vec![0.0];
    let mut edge = (1.0 / x.sqrt()).min(upper);
    while edge < upper {
        pieces.push(edge);
        edge *= 2.0;
    }
    pieces.push(upper);
    pieces.windows(2).map(|w| integrate(integrand, w[0], w[1], 0.0, 1e-15)).sum()
}

/// One-sample Kolmogorov-Smirnov statistic. `cdf` is evaluated at each
/// point of `sorted` (ascending).
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let hi = (i + 1) as f64 / n - f;
            let lo = f - i as f64 / n;
            hi.max(lo)
        })
        .fold(0.0, f64::max)
}

/// One-sample KS statistic against a density, with the CDF built by
/// cumulative adaptive quadrature between consecutive order statistics.
/// `lower` is the left end of the support (may be `-inf`).
pub fn ks_statistic_from_density(sorted: &[f64], density: impl Fn(f64) -> f64, lower: f64) -> f64 {
    let mut cdf_values = Vec::with_capacity(sorted.len());
    let mut acc = if lower.is_finite() {
        integrate(&density, lower, sorted[0], 1e-14, 1e-12)
    } else {
        integrate_lower(&density, sorted[0], 1e-14, 1e-12)
    };
    cdf_values.push(acc);
    for w in sorted.windows(2) {
        if w[1] > w[0] {
            acc += integrate(&density, w[0], w[1], 1e-15, 1e-10);
        }
        cdf_values.push(acc);
    }
    let n = sorted.len() as f64;
    cdf_values.iter().enumerate().map(|(i, &f)| ((i + 1) as f64 / n - f).max(f - i as f64 / n)).fold(0.0, f64::max)
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Mean and batch-means standard error for an autocorrelated series.
pub fn batch_mean_and_se(xs: &[f64], n_batches: usize) -> (f64, f64) {
    let size = xs.len() / n_batches;
    let batch_means: Vec<f64> =
        (0..n_batches).map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64).collect();
    let (m, se) = mean_and_se(&batch_means);
    (m, se)
}

/// Dense matrix stored row-major, for tiny brute-force checks.
#[derive(Debug, Clone)]
pub struct Dense {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Dense {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Dense { n, data }
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Dense::identity(values.len());
        for (i, v) in values.iter().enumerate() {
            m.data[i * m.n + i] = *v;
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn add_outer(&mut self, scale: f64, v: &[f64]) {
        for i in 0..self.n {
            for j in 0..self.n {
                self.data[i * self.n + j] += scale * v[i] * v[j];
            }
        }
    }

    /// Log-determinant and solution of `self * x = rhs` by Gaussian
    /// elimination with partial pivoting.
    pub fn log_det_and_solve(&self, rhs: &[f64]) -> (f64, Vec<f64>) {
        let n = self.n;
        let mut a = self.data.clone();
        let mut b = rhs.to_vec();
        let mut log_det = 0.0;
        for col in 0..n {
            let pivot = (col..n).max_by(|&r1, &r2| a[r1 * n + col].abs().total_cmp(&a[r2 * n + col].abs())).unwrap();
            if pivot != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot * n + k);
                }
                b.swap(col, pivot);
            }
            let d = a[col * n + col];
            log_det += d.abs().ln();
            for r in (col + 1)..n {
                let factor = a[r * n + col] / d;
                for k in col..n {
                    a[r * n + k] -= factor * a[col * n + k];
                }
                b[r] -= factor * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            let mut s = b[r];
            for k in (r + 1)..n {
                s -= a[r * n + k] * x[k];
            }
            x[r] = s / a[r * n + r];
        }
        (log_det, x)
    }
}

/// Log density of `N(x | 0, cov)` computed densely.
pub fn mvn_log_density_zero_mean(x: &[f64], cov: &Dense) -> f64 {
    let (log_det, sol) = cov.log_det_and_solve(x);
    let quad: f64 = x.iter().zip(&sol).map(|(a, b)| a * b).sum();
    -0.5 * (x.len() as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + quad)
}

/// Sample skewness and excess kurtosis.
pub fn skew_and_excess_kurtosis(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m3 = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

/// Lag-1 sample autocorrelation.
pub fn lag1_autocorrelation(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    let cov: f64 = xs.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x.powi(20), -1.0, 1.0, 0.0, 1e-15);
        assert!((v - 2.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_tail_integral() {
        let v = integrate_upper(|x| (-0.5 * x * x).exp(), 0.0, 0.0, 1e-14);
        let exact = (std::f64::consts::PI / 2.0).sqrt();
        assert!((v - exact).abs() / exact < 1e-12, "{v}");
    }

    #[test]
    fn bessel_half_integer_closed_form() {
        for &x in &[1e-3, 0.5, 2.0, 30.0, 500.0] {
            let exact = (std::f64::consts::PI / (2.0 * x)).sqrt();
            let q = bessel_k_scaled(0.5, x);
            assert!((q - exact).abs() / exact < 1e-13, "x={x} q={q} exact={exact}");
        }
    }

    #[test]
    fn dense_solve_matches_hand_values() {
        let m = Dense { n: 2, data: vec![2.0, 1.0, 1.0, 3.0] };
        let (ld, x) = m.log_det_and_solve(&[3.0, 5.0]);
        assert!((ld - 5f64.ln()).abs() < 1e-14);
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
    }
}
