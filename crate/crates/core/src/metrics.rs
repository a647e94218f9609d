//! Estimation, prediction, interval and selection metrics.

use nalgebra::DMatrix;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::{Dataset, PosteriorDraws};
use crate::stats::quantile_sorted;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMethod {
    EquiTailed,
    SandwichNormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalEstimate {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub method: IntervalMethod,
}

impl IntervalEstimate {
    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Per-coordinate mean over draws of `(beta_j - truth_j)^2`.
pub fn posterior_mse(draws: &PosteriorDraws, beta_true: &[f64]) -> Result<Vec<f64>> {
    if beta_true.len() != draws.p {
        return Err(Error::Dimension(format!("truth has length {}, draws have p = {}", beta_true.len(), draws.p)));
    }
    let mut out = vec![0.0; draws.p];
    for k in 0..draws.n_draws {
        for (o, (b, t)) in out.iter_mut().zip(draws.beta_draw(k).iter().zip(beta_true)) {
            *o += (b - t).powi(2);
        }
    }
    out.iter_mut().for_each(|v| *v /= draws.n_draws as f64);
    Ok(out)
}

/// Per-observation mean over draws of `(y_i - mu - x_i' beta)^2`.
pub fn prediction_mse(draws: &PosteriorDraws, test: &Dataset) -> Result<Vec<f64>> {
    if test.p() != draws.p {
        return Err(Error::Dimension(format!("test data have {} predictors, draws have {}", test.p(), draws.p)));
    }
    let mut out = vec![0.0; test.n()];
    for k in 0..draws.n_draws {
        let beta = draws.beta_draw(k);
        let mu = if draws.include_intercept { draws.mu[k] } else { 0.0 };
        for (i, o) in out.iter_mut().enumerate() {
            let fit = mu + (0..draws.p).map(|j| test.x[(i, j)] * beta[j]).sum::<f64>();
            *o += (test.y[i] - fit).powi(2);
        }
    }
    out.iter_mut().for_each(|v| *v /= draws.n_draws as f64);
    Ok(out)
}

/// Equi-tailed credible interval for `beta_j`.
pub fn credible_interval(draws: &PosteriorDraws, j: usize, level: f64) -> Result<IntervalEstimate> {
    check_level(level)?;
    if j >= draws.p {
        return Err(Error::Dimension(format!("coordinate {j} out of range for p = {}", draws.p)));
    }
    let mut xs = draws.beta_coordinate(j);
    xs.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok(IntervalEstimate {
        lower: quantile_sorted(&xs, tail),
        upper: quantile_sorted(&xs, 1.0 - tail),
        level,
        method: IntervalMethod::EquiTailed,
    })
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level <= 1.0 {
        Ok(())
    } else {
        Err(Error::Input(format!("interval level must lie in (0, 1], got {level}")))
    }
}

/// `V = var(beta | data) X'X var(beta | data) / s2`, symmetrized.
pub fn sandwich_covariance(posterior_cov: &DMatrix<f64>, x: &DMatrix<f64>, s2: f64) -> Result<DMatrix<f64>> {
    if !(s2 > 0.0) {
        return Err(Error::Domain(format!("sandwich scale must be positive, got {s2}")));
    }
    let v = posterior_cov * x.tr_mul(x) * posterior_cov / s2;
    let sym = (&v + v.transpose()) * 0.5;
    let tol = 1e-8 * sym.amax().max(f64::MIN_POSITIVE);
    if sym.diagonal().iter().any(|d| *d < -tol) {
        return Err(Error::Domain("sandwich covariance is not positive semidefinite".into()));
    }
    Ok(sym)
}

/// Working-model scale entering the sandwich prefactor. SPH and its unscaled
/// variant use sigma^2 (one when sigma is not sampled); the L1 mixture has
/// Laplace scale sigma/sqrt(2), so its squared scale is sigma^2 / 2.
pub fn sandwich_scale(draws: &PosteriorDraws, sigma_sampled: bool) -> f64 {
    let sigma2 = if sigma_sampled { crate::stats::mean(&draws.sigma2) } else { 1.0 };
    match draws.loss {
        crate::sph::LossKind::L1 => 0.5 * sigma2,
        _ => sigma2,
    }
}

/// Normal interval centred at the posterior mean with the sandwich variance.
pub fn sandwich_interval(
    draws: &PosteriorDraws,
    data: &Dataset,
    s2: f64,
    j: usize,
    level: f64,
) -> Result<IntervalEstimate> {
    let v = sandwich_covariance(&draws.beta_covariance(), &data.x, s2)?;
    sandwich_interval_from(&draws.beta_mean(), &v, j, level)
}

pub fn sandwich_interval_from(mean: &[f64], v: &DMatrix<f64>, j: usize, level: f64) -> Result<IntervalEstimate> {
    check_level(level)?;
    let sd = v[(j, j)].max(0.0).sqrt();
    let half = if level >= 1.0 { f64::INFINITY } else { Normal::standard().inverse_cdf(0.5 + level / 2.0) * sd };
    let half = if sd == 0.0 { 0.0 } else { half };
    Ok(IntervalEstimate { lower: mean[j] - half, upper: mean[j] + half, level, method: IntervalMethod::SandwichNormal })
}

/// Fraction of replicates whose interval covers the truth, and mean length.
pub fn coverage_and_length(intervals: &[IntervalEstimate], truth: f64) -> (f64, f64) {
    if intervals.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let r = intervals.len() as f64;
    let hits = intervals.iter().filter(|i| i.contains(truth)).count() as f64;
    let len = intervals.iter().map(IntervalEstimate::length).sum::<f64>() / r;
    (hits / r, len)
}

/// Matthews correlation coefficient; zero when any confusion margin is empty.
pub fn mcc(estimate: &[bool], truth: &[bool]) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::Dimension(format!("lengths {} and {} differ", estimate.len(), truth.len())));
    }
    let (mut tp, mut tn, mut fp, mut fn_) = (0.0, 0.0, 0.0, 0.0);
    for (e, t) in estimate.iter().zip(truth) {
        match (e, t) {
            (true, true) => tp += 1.0,
            (false, false) => tn += 1.0,
            (true, false) => fp += 1.0,
            (false, true) => fn_ += 1.0,
        }
    }
    let denom: f64 = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((tp * tn - fp * fn_) / denom.sqrt())
}

/// Median over replicates for each coordinate, then median over coordinates.
/// `per_replicate[r][j]`; only the first `p1` coordinates are used.
pub fn median_of_medians(per_replicate: &[Vec<f64>], p1: usize) -> f64 {
    let medians: Vec<f64> =
        (0..p1).map(|j| crate::stats::median(&per_replicate.iter().map(|r| r[j]).collect::<Vec<_>>())).collect();
    crate::stats::median(&medians)
}
