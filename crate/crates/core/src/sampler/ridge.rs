//! Slice-within-Gibbs sampler under the Gaussian (ridge) prior, covering the
//! SPH, unscaled pseudo-Huber, L1 and L2 error models.

use nalgebra::{DMatrix, DVector};

use super::steps::{update_mu, update_scales, update_sigma2};
use crate::distributions::{standard_normal, RngStream};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_jittered, solve_upper_transpose};
use crate::model::{ChainState, Dataset, McmcConfig, RidgeSpec};

pub struct RidgeSampler<'a> {
    data: &'a Dataset,
    spec: &'a RidgeSpec,
    config: &'a McmcConfig,
    precision: DMatrix<f64>,
    beta0: DVector<f64>,
    precision_beta0: DVector<f64>,
    resid: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> RidgeSampler<'a> {
    pub fn new(data: &'a Dataset, spec: &'a RidgeSpec, config: &'a McmcConfig) -> Result<Self> {
        spec.common.validate()?;
        config.validate()?;
        let p = data.p();
        let precision = spec.precision_matrix(p)?;
        let beta0 = spec.prior_mean(p)?;
        let precision_beta0 = &precision * &beta0;
        Ok(Self {
            data,
            spec,
            config,
            precision,
            beta0,
            precision_beta0,
            resid: vec![0.0; data.n()],
            scratch: Vec::with_capacity(data.n()),
        })
    }

    /// Ridge least-squares start, intercept from the mean residual, unit
    /// scales.
    pub fn initial_state(&self) -> Result<ChainState> {
        let x = &self.data.x;
        let y = DVector::from_column_slice(&self.data.y);
        let gram = x.tr_mul(x) + &self.precision;
        let factor = cholesky_jittered(&gram, self.config.jitter_start, self.config.jitter_max)?;
        let beta = factor.chol.solve(&x.tr_mul(&y));
        let n = self.data.n();
        let mu = if self.spec.common.include_intercept && n > 0 { (y - x * &beta).sum() / n as f64 } else { 0.0 };
        Ok(ChainState {
            beta: beta.iter().copied().collect(),
            gamma: vec![true; self.data.p()],
            mu,
            lambda: vec![1.0; n],
            sigma2: 1.0,
            alpha2: self.spec.common.fixed_alpha2.unwrap_or(1.0),
            q: 1.0,
        })
    }

    /// Current residuals `y - mu - X beta` after the last step.
    pub fn residuals(&self) -> &[f64] {
        &self.resid
    }

    /// One full sweep: mu, beta, (alpha^2, lambda), sigma^2.
    pub fn step(&mut self, state: &mut ChainState, rng: &mut RngStream) -> Result<()> {
        let common = &self.spec.common;
        compute_residuals(self.data, state, &mut self.resid);
        if common.include_intercept {
            update_mu(state, &mut self.resid, common, rng);
        }
        self.update_beta(state, rng)?;
        compute_residuals(self.data, state, &mut self.resid);
        update_scales(state, &self.resid, common, self.config, &mut self.scratch, rng)?;
        if common.samples_sigma() {
            let dev = DVector::from_column_slice(&state.beta) - &self.beta0;
            let quad = dev.dot(&(&self.precision * &dev));
            update_sigma2(state, &self.resid, common, self.data.p(), quad, rng)?;
        }
        Ok(())
    }

    /// `beta | rest ~ N(V m, sigma^2 V)`, `V = (X' L^{-1} X + Q)^{-1}`,
    /// `m = X' L^{-1} (y - mu) + Q beta0`.
    fn update_beta(&mut self, state: &mut ChainState, rng: &mut RngStream) -> Result<()> {
        let (n, p) = (self.data.n(), self.data.p());
        if p == 0 {
            return Ok(());
        }
        let root_w: Vec<f64> = state.lambda.iter().map(|l| 1.0 / l.sqrt()).collect();
        let mut xw = self.data.x.clone();
        for j in 0..p {
            let mut col = xw.column_mut(j);
            for i in 0..n {
                col[i] *= root_w[i];
            }
        }
        let yw = DVector::from_iterator(n, (0..n).map(|i| (self.data.y[i] - state.mu) * root_w[i]));
        let post_precision = xw.tr_mul(&xw) + &self.precision;
        let linear = xw.tr_mul(&yw) + &self.precision_beta0;
        let factor = cholesky_jittered(&post_precision, self.config.jitter_start, self.config.jitter_max).map_err(
            |e| match e {
                Error::Singular(msg) => Error::Singular(format!("beta posterior precision: {msg}")),
                other => other,
            },
        )?;
        let mean = factor.chol.solve(&linear);
        let l = factor.chol.l();
        let mut z = DVector::from_fn(p, |_, _| standard_normal(rng));
        solve_upper_transpose(&l, &mut z);
        let sigma = state.sigma2.sqrt();
        for j in 0..p {
            state.beta[j] = mean[j] + sigma * z[j];
        }
        Ok(())
    }
}

pub(crate) fn compute_residuals(data: &Dataset, state: &ChainState, out: &mut [f64]) {
    let n = data.n();
    for (i, o) in out.iter_mut().enumerate().take(n) {
        *o = data.y[i] - state.mu;
    }
    for (j, b) in state.beta.iter().enumerate() {
        if *b == 0.0 {
            continue;
        }
        let col = data.x.column(j);
        for i in 0..n {
            out[i] -= col[i] * b;
        }
    }
}
