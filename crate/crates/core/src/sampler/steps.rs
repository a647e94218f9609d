//! Full-conditional updates shared by the ridge and spike-and-slab samplers.
//!
//! Every function takes the current residual vector `y - mu - X beta` and
//! keeps it consistent with the state it modifies.

use super::alpha::{log_alpha2_conditional, GammaPrior};
use super::slice::slice_sample_step;
use crate::distributions::{sample_gig, sample_inverse_gamma, standard_normal, GigParams, RngStream};
use crate::error::Result;
use crate::model::{ChainState, CommonSpec, McmcConfig};
use crate::sph::LossKind;

/// `mu | rest ~ N(v m, sigma^2 v)` with `v = 1 / (1/tau_mu^2 + sum 1/lambda_i)`
/// and `m = sum (y_i - x_i' beta) / lambda_i`.
pub fn update_mu(state: &mut ChainState, resid: &mut [f64], common: &CommonSpec, rng: &mut RngStream) {
    let mut precision = 1.0 / common.tau_mu2;
    let mut m = 0.0;
    for (r, l) in resid.iter().zip(&state.lambda) {
        precision += 1.0 / l;
        m += (r + state.mu) / l;
    }
    let v = 1.0 / precision;
    let new_mu = v * m + (state.sigma2 * v).sqrt() * standard_normal(rng);
    let shift = new_mu - state.mu;
    resid.iter_mut().for_each(|r| *r -= shift);
    state.mu = new_mu;
}

/// Observation scales given residuals. `L2` keeps them at one.
pub fn update_lambda(state: &mut ChainState, resid: &[f64], loss: LossKind, rng: &mut RngStream) -> Result<()> {
    let inv_sigma2 = 1.0 / state.sigma2;
    let alpha2 = state.alpha2;
    let a = match loss {
        LossKind::Sph => 1.0 + alpha2,
        LossKind::UnscaledPh => alpha2,
        LossKind::L1 => 2.0,
        LossKind::L2 | LossKind::Huber => return Ok(()),
    };
    let prior_b = if loss == LossKind::L1 { 0.0 } else { alpha2 };
    for (l, r) in state.lambda.iter_mut().zip(resid) {
        let b = prior_b + r * r * inv_sigma2;
        *l = sample_gig(GigParams { a, b, p: 0.5 }, rng)?;
    }
    Ok(())
}

/// `sigma^2 | rest ~ InvGamma(a_sigma + (n + k)/2, b_sigma + (r' L^{-1} r + quad)/2)`,
/// where the intercept prior contributes to `k` and `quad` when present, and
/// `prior_dim`, `prior_quad` carry any further sigma-scaled prior terms.
pub fn update_sigma2(
    state: &mut ChainState,
    resid: &[f64],
    common: &CommonSpec,
    prior_dim: usize,
    prior_quad: f64,
    rng: &mut RngStream,
) -> Result<()> {
    let mut dims = resid.len() + prior_dim;
    let mut quad = prior_quad;
    for (r, l) in resid.iter().zip(&state.lambda) {
        quad += r * r / l;
    }
    if common.include_intercept {
        dims += 1;
        quad += state.mu * state.mu / common.tau_mu2;
    }
    let shape = common.a_sigma + 0.5 * dims as f64;
    let scale = common.b_sigma + 0.5 * quad;
    state.sigma2 = sample_inverse_gamma(shape, scale, rng)?;
    Ok(())
}

/// One slice move on alpha^2 from its conditional with the observation
/// scales integrated out. Must be followed by a fresh lambda draw so that
/// the pair is a valid block update.
pub fn update_alpha2(
    state: &mut ChainState,
    resid: &[f64],
    common: &CommonSpec,
    config: &McmcConfig,
    scratch: &mut Vec<f64>,
    rng: &mut RngStream,
) -> Result<()> {
    let sigma = state.sigma2.sqrt();
    scratch.clear();
    scratch.extend(resid.iter().map(|r| r / sigma));
    let prior = Some(GammaPrior { shape: common.a_alpha, rate: common.b_alpha });
    let loss = common.loss;
    let target = |a2: f64| log_alpha2_conditional(a2, scratch, loss, prior);
    state.alpha2 =
        slice_sample_step(target, state.alpha2, config.slice_width, config.slice_max_steps, (0.0, f64::INFINITY), rng)?;
    Ok(())
}

/// Scale-parameter block: alpha^2 (when sampled) followed by lambda.
pub fn update_scales(
    state: &mut ChainState,
    resid: &[f64],
    common: &CommonSpec,
    config: &McmcConfig,
    scratch: &mut Vec<f64>,
    rng: &mut RngStream,
) -> Result<()> {
    if common.samples_alpha() {
        update_alpha2(state, resid, common, config, scratch, rng)?;
    }
    update_lambda(state, resid, common.loss, rng)
}
