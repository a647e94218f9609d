//! Coordinate-wise Gibbs sampler under the spike-and-slab prior.
//!
//! Each `(beta_j, gamma_j)` pair is drawn jointly: `gamma_j` from its
//! conditional with `beta_j` integrated out, then `beta_j` given `gamma_j`.
//! The residual vector is updated in place so a sweep costs `O(n p)`.

use rand::seq::SliceRandom;

use crate::distributions::{sample_beta, standard_normal, RngStream};
use crate::error::Result;
use crate::model::{ChainState, Dataset, McmcConfig, SpikeSlabSpec, UpdateOrder};
use crate::sampler::compute_residuals;
use crate::sampler::steps::{update_mu, update_scales, update_sigma2};

/// Log ratio of the marginal likelihoods of the partial residual with and
/// without coordinate `j`, from the sufficient statistics
/// `t = x_j' L^{-1} x_j` and `s = x_j' L^{-1} r_j`.
///
/// With `S0 = sigma^2 L` and `S1 = S0 + tau^2 x_j x_j'`, the determinant
/// lemma and Sherman-Morrison give
/// `-1/2 ln(1 + tau^2 t / sigma^2) + tau^2 s^2 / (2 sigma^2 (sigma^2 + tau^2 t))`.
pub fn log_lr_from_stats(s: f64, t: f64, sigma2: f64, tau2: f64) -> f64 {
    let denom = sigma2 + tau2 * t;
    -0.5 * (tau2 * t / sigma2).ln_1p() + 0.5 * tau2 * s * s / (sigma2 * denom)
}

/// [`log_lr_from_stats`] computed from the partial residual, the column and
/// the observation scales.
pub fn log_lr(partial_residual: &[f64], x_j: &[f64], lambda: &[f64], sigma2: f64, tau2: f64) -> f64 {
    let (s, t) = sufficient_stats(partial_residual, x_j, lambda);
    log_lr_from_stats(s, t, sigma2, tau2)
}

fn sufficient_stats(r: &[f64], x: &[f64], lambda: &[f64]) -> (f64, f64) {
    let (mut s, mut t) = (0.0, 0.0);
    for ((xi, ri), li) in x.iter().zip(r).zip(lambda) {
        let wx = xi / li;
        s += wx * ri;
        t += wx * xi;
    }
    (s, t)
}

/// Posterior probability of `gamma_j = 1` given the prior weight `q`.
pub fn inclusion_probability(q: f64, log_lr: f64) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    if q >= 1.0 {
        return 1.0;
    }
    let z = q.ln() - (-q).ln_1p() + log_lr;
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Joint update of `(beta_j, gamma_j)`. `resid` must hold `y - mu - X beta`
/// on entry and is kept consistent on exit.
pub fn update_coordinate(
    j: usize,
    x_j: &[f64],
    state: &mut ChainState,
    resid: &mut [f64],
    tau2: f64,
    rng: &mut RngStream,
) {
    let old = state.beta[j];
    let (mut s, mut t) = (0.0, 0.0);
    for ((xi, ri), li) in x_j.iter().zip(resid.iter()).zip(&state.lambda) {
        let wx = xi / li;
        // Partial residual r_j = resid + x_j beta_j.
        s += wx * (ri + xi * old);
        t += wx * xi;
    }
    let sigma2 = state.sigma2;
    let prob = inclusion_probability(state.q, log_lr_from_stats(s, t, sigma2, tau2));
    let include = prob >= 1.0 || (prob > 0.0 && rng.open01() < prob);
    let new = if include {
        let var = sigma2 / (t + sigma2 / tau2);
        var * s / sigma2 + var.sqrt() * standard_normal(rng)
    } else {
        0.0
    };
    let delta = new - old;
    if delta != 0.0 {
        for (ri, xi) in resid.iter_mut().zip(x_j) {
            *ri -= xi * delta;
        }
    }
    state.beta[j] = new;
    state.gamma[j] = include;
}

/// `q | gamma ~ Beta(a_q + p1, b_q + p - p1)`.
pub fn update_q(gamma: &[bool], spec: &SpikeSlabSpec, rng: &mut RngStream) -> Result<f64> {
    let p1 = gamma.iter().filter(|g| **g).count() as f64;
    let p = gamma.len() as f64;
    sample_beta(spec.a_q + p1, spec.b_q + p - p1, rng)
}

/// sigma^2 under the spike-and-slab prior. The slab variance is not scaled
/// by sigma^2, so only the residuals and the intercept prior contribute.
pub fn update_sigma2_ss(
    state: &mut ChainState,
    resid: &[f64],
    spec: &SpikeSlabSpec,
    rng: &mut RngStream,
) -> Result<()> {
    update_sigma2(state, resid, &spec.common, 0, 0.0, rng)
}

pub struct SpikeSlabSampler<'a> {
    data: &'a Dataset,
    spec: &'a SpikeSlabSpec,
    config: &'a McmcConfig,
    resid: Vec<f64>,
    scratch: Vec<f64>,
    order: Vec<usize>,
}

impl<'a> SpikeSlabSampler<'a> {
    pub fn new(data: &'a Dataset, spec: &'a SpikeSlabSpec, config: &'a McmcConfig) -> Result<Self> {
        spec.validate()?;
        config.validate()?;
        Ok(Self {
            data,
            spec,
            config,
            resid: vec![0.0; data.n()],
            scratch: Vec::with_capacity(data.n()),
            order: (0..data.p()).collect(),
        })
    }

    /// Ridge start with every coordinate active and `q = 1/2`.
    pub fn initial_state(&self) -> Result<ChainState> {
        let ridge = crate::model::RidgeSpec { common: self.spec.common.clone(), ..Default::default() };
        let mut state = crate::sampler::RidgeSampler::new(self.data, &ridge, self.config)?.initial_state()?;
        state.q = self.spec.fixed_q.unwrap_or(0.5);
        Ok(state)
    }

    /// Residuals `y - mu - X beta` as maintained incrementally by the last sweep.
    pub fn residuals(&self) -> &[f64] {
        &self.resid
    }

    /// One sweep: mu, coordinates, (alpha^2, lambda), sigma^2, q.
    pub fn step(&mut self, state: &mut ChainState, rng: &mut RngStream) -> Result<()> {
        let common = &self.spec.common;
        compute_residuals(self.data, state, &mut self.resid);
        if common.include_intercept {
            update_mu(state, &mut self.resid, common, rng);
        }
        self.sweep(state, rng);
        update_scales(state, &self.resid, common, self.config, &mut self.scratch, rng)?;
        if common.samples_sigma() {
            update_sigma2_ss(state, &self.resid, self.spec, rng)?;
        }
        if self.spec.fixed_q.is_none() {
            state.q = update_q(&state.gamma, self.spec, rng)?;
        }
        Ok(())
    }

    /// The coordinate sweep alone, leaving all other parameters fixed.
    pub fn sweep(&mut self, state: &mut ChainState, rng: &mut RngStream) {
        if self.spec.update_order == UpdateOrder::Shuffled {
            self.order.shuffle(rng);
        }
        let n = self.data.n();
        let xs = self.data.x.as_slice();
        for &j in &self.order {
            update_coordinate(j, &xs[j * n..(j + 1) * n], state, &mut self.resid, self.spec.tau2, rng);
        }
    }

    /// Recomputes the residual vector from the state.
    pub fn sync_residuals(&mut self, state: &ChainState) {
        compute_residuals(self.data, state, &mut self.resid);
    }
}
