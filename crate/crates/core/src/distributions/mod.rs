//! Random variates and densities for the families used by the samplers.
//!
//! Parameterizations: `Gamma(shape, rate)`, `InvGamma(shape, scale)` with
//! density proportional to `x^{-shape-1} exp(-scale/x)`, inverse Gaussian
//! `IG(mean, shape)`, and `GIG(a, b, p)` as documented in [`gig`].

mod gig;
mod rng;

pub use gig::{sample_gig, GigParams};
pub use rng::{stream_key, RngStream};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};

use crate::error::{domain, Result};
use crate::linalg::{cholesky_jittered, solve_upper_transpose, DEFAULT_JITTER_MAX, DEFAULT_JITTER_START};

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} must be finite and positive, got {v}"))
    }
}

pub fn standard_normal(rng: &mut RngStream) -> f64 {
    rng.sample(StandardNormal)
}

pub fn sample_normal(mean: f64, sd: f64, rng: &mut RngStream) -> Result<f64> {
    if !(sd >= 0.0) || !sd.is_finite() || !mean.is_finite() {
        return domain(format!("normal needs finite mean and sd >= 0, got ({mean}, {sd})"));
    }
    Ok(mean + sd * standard_normal(rng))
}

/// Gamma with the given shape and rate.
pub fn sample_gamma(shape: f64, rate: f64, rng: &mut RngStream) -> Result<f64> {
    positive("gamma shape", shape)?;
    positive("gamma rate", rate)?;
    let dist = Gamma::new(shape, 1.0 / rate).map_err(|e| crate::Error::Domain(e.to_string()))?;
    Ok(dist.sample(rng))
}

/// Inverse gamma with the given shape and scale; mean `scale / (shape - 1)`.
pub fn sample_inverse_gamma(shape: f64, scale: f64, rng: &mut RngStream) -> Result<f64> {
    positive("inverse gamma scale", scale)?;
    Ok(1.0 / sample_gamma(shape, scale, rng)?)
}

pub fn sample_beta(a: f64, b: f64, rng: &mut RngStream) -> Result<f64> {
    positive("beta a", a)?;
    positive("beta b", b)?;
    let dist = Beta::new(a, b).map_err(|e| crate::Error::Domain(e.to_string()))?;
    Ok(dist.sample(rng))
}

pub fn sample_bernoulli(prob: f64, rng: &mut RngStream) -> Result<bool> {
    if !(0.0..=1.0).contains(&prob) {
        return domain(format!("bernoulli probability must lie in [0, 1], got {prob}"));
    }
    if prob == 0.0 {
        return Ok(false);
    }
    Ok(rng.open01() < prob)
}

/// Inverse Gaussian with the given mean and shape, by the transformation
/// method of Michael, Schucany and Haas, arranged to avoid cancellation when
/// `shape` is large.
pub fn sample_inverse_gaussian(mean: f64, shape: f64, rng: &mut RngStream) -> Result<f64> {
    positive("inverse gaussian mean", mean)?;
    positive("inverse gaussian shape", shape)?;
    let z = standard_normal(rng);
    let c = mean * z * z / shape;
    let x = 2.0 * mean / (2.0 + c + (c * (c + 4.0)).sqrt());
    if rng.open01() <= mean / (mean + x) {
        Ok(x)
    } else {
        Ok(mean * mean / x)
    }
}

pub fn inverse_gaussian_log_density(x: f64, mean: f64, shape: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NEG_INFINITY;
    }
    0.5 * (shape / (2.0 * std::f64::consts::PI)).ln()
        - 1.5 * x.ln()
        - shape * (x - mean).powi(2) / (2.0 * mean * mean * x)
}

/// How the matrix passed to [`sample_mvn`] is to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MvnForm {
    Covariance,
    Precision,
}

/// Multivariate normal draw through a Cholesky factor of the covariance or
/// precision matrix.
pub fn sample_mvn(mean: &[f64], matrix: &DMatrix<f64>, form: MvnForm, rng: &mut RngStream) -> Result<Vec<f64>> {
    let k = mean.len();
    if matrix.nrows() != k || matrix.ncols() != k {
        return Err(crate::Error::Dimension(format!(
            "mean has length {k} but matrix is {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    let factor = cholesky_jittered(matrix, DEFAULT_JITTER_START, DEFAULT_JITTER_MAX)?;
    let l = factor.chol.l();
    let mut z = DVector::from_fn(k, |_, _| standard_normal(rng));
    let dev = match form {
        MvnForm::Covariance => &l * z,
        MvnForm::Precision => {
            solve_upper_transpose(&l, &mut z);
            z
        }
    };
    Ok(mean.iter().zip(dev.iter()).map(|(m, d)| m + d).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    #[test]
    fn gamma_mean() {
        let mut rng = RngStream::new(1, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| sample_gamma(3.0, 2.0, &mut rng).unwrap()).collect();
        let (m, se) = mean_se(&xs);
        assert!((m - 1.5).abs() < 3.0 * se);
    }

    #[test]
    fn inverse_gamma_mean() {
        let mut rng = RngStream::new(2, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| sample_inverse_gamma(3.0, 2.0, &mut rng).unwrap()).collect();
        let (m, se) = mean_se(&xs);
        assert!((m - 1.0).abs() < 3.0 * se);
    }

    #[test]
    fn beta_mean() {
        let mut rng = RngStream::new(3, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| sample_beta(2.0, 2.0, &mut rng).unwrap()).collect();
        let (m, se) = mean_se(&xs);
        assert!((m - 0.5).abs() < 3.0 * se);
    }

    #[test]
    fn bernoulli_edges() {
        let mut rng = RngStream::new(4, 0);
        assert!((0..1000).all(|_| !sample_bernoulli(0.0, &mut rng).unwrap()));
        assert!((0..1000).all(|_| sample_bernoulli(1.0, &mut rng).unwrap()));
        assert!(sample_bernoulli(1.5, &mut rng).is_err());
    }

    #[test]
    fn inverse_gaussian_moments() {
        let mut rng = RngStream::new(5, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| sample_inverse_gaussian(1.0, 1.0, &mut rng).unwrap()).collect();
        let (m, se) = mean_se(&xs);
        assert!((m - 1.0).abs() < 3.0 * se);

        // Variance mean^3 / shape = 2; SE of the sample variance from the
        // fourth central moment 15 mean^7 / shape^3 + 3 var^2 = 15 * 128 / 64 + 12 = 42.
        let ys: Vec<f64> = (0..100_000).map(|_| sample_inverse_gaussian(2.0, 4.0, &mut rng).unwrap()).collect();
        let (my, _) = mean_se(&ys);
        let var = ys.iter().map(|y| (y - my).powi(2)).sum::<f64>() / (ys.len() as f64 - 1.0);
        let se_var = ((42.0 - 4.0) / ys.len() as f64).sqrt();
        assert!((var - 2.0).abs() < 3.0 * se_var, "var {var} se {se_var}");
    }

    #[test]
    fn inverse_gaussian_degenerate_shape() {
        let mut rng = RngStream::new(6, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| sample_inverse_gaussian(1.0, 1e8, &mut rng).unwrap()).collect();
        let (m, se) = mean_se(&xs);
        let sd = se * (xs.len() as f64).sqrt();
        assert!(sd < 1e-3 && (m - 1.0).abs() < 1e-4);
    }

    #[test]
    fn mvn_covariance_and_precision() {
        let mut rng = RngStream::new(7, 0);
        let n = 100_000;
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let draws: Vec<Vec<f64>> =
            (0..n).map(|_| sample_mvn(&[1.0, 2.0], &cov, MvnForm::Covariance, &mut rng).unwrap()).collect();
        for (j, target) in [1.0, 2.0].iter().enumerate() {
            let col: Vec<f64> = draws.iter().map(|d| d[j]).collect();
            let (m, se) = mean_se(&col);
            assert!((m - target).abs() < 3.0 * se);
        }

        let identity = DMatrix::<f64>::identity(2, 2);
        let draws: Vec<Vec<f64>> =
            (0..n).map(|_| sample_mvn(&[0.0, 0.0], &identity, MvnForm::Covariance, &mut rng).unwrap()).collect();
        for (r, c) in [(0, 0), (0, 1), (1, 1)] {
            let s = draws.iter().map(|d| d[r] * d[c]).sum::<f64>() / n as f64;
            let want = if r == c { 1.0 } else { 0.0 };
            assert!((s - want).abs() < 0.02);
        }

        let precision = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 4.0]);
        let draws: Vec<Vec<f64>> =
            (0..n).map(|_| sample_mvn(&[0.0, 0.0], &precision, MvnForm::Precision, &mut rng).unwrap()).collect();
        for j in 0..2 {
            let v = draws.iter().map(|d| d[j] * d[j]).sum::<f64>() / n as f64;
            assert!((v - 0.25).abs() < 0.01);
        }
    }

    #[test]
    fn domain_errors() {
        let mut rng = RngStream::new(8, 0);
        assert!(sample_gamma(0.0, 1.0, &mut rng).is_err());
        assert!(sample_inverse_gaussian(-1.0, 1.0, &mut rng).is_err());
        assert!(sample_inverse_gaussian(1.0, 0.0, &mut rng).is_err());
        assert!(sample_beta(1.0, -2.0, &mut rng).is_err());
    }
}
