use super::RidgeSampler;
use crate::distributions::RngStream;
use crate::error::{Error, Result};
use crate::model::{ChainState, Dataset, McmcConfig, ModelSpec, PosteriorDraws};
use crate::spike_slab::SpikeSlabSampler;

enum Driver<'a> {
    Ridge(RidgeSampler<'a>),
    SpikeSlab(SpikeSlabSampler<'a>),
}

impl Driver<'_> {
    fn step(&mut self, state: &mut ChainState, rng: &mut RngStream) -> Result<()> {
        match self {
            Driver::Ridge(s) => s.step(state, rng),
            Driver::SpikeSlab(s) => s.step(state, rng),
        }
    }
}

/// Runs `n_burnin + n_draws` sweeps and keeps the last `n_draws` states.
pub fn run_chain(data: &Dataset, spec: &ModelSpec, config: &McmcConfig, rng: &mut RngStream) -> Result<PosteriorDraws> {
    let (mut driver, mut state) = match spec {
        ModelSpec::Ridge(s) => {
            let sampler = RidgeSampler::new(data, s, config)?;
            let state = sampler.initial_state()?;
            (Driver::Ridge(sampler), state)
        }
        ModelSpec::SpikeSlab(s) => {
            let sampler = SpikeSlabSampler::new(data, s, config)?;
            let state = sampler.initial_state()?;
            (Driver::SpikeSlab(sampler), state)
        }
    };
    let common = spec.common();
    let (n, p, keep) = (data.n(), data.p(), config.n_draws);
    let sparse = matches!(spec, ModelSpec::SpikeSlab(_));
    let mut draws = PosteriorDraws {
        n_draws: keep,
        n,
        p,
        beta: Vec::with_capacity(keep * p),
        gamma: sparse.then(|| Vec::with_capacity(keep * p)),
        mu: Vec::with_capacity(keep),
        sigma2: Vec::with_capacity(keep),
        alpha2: Vec::with_capacity(keep),
        q: sparse.then(|| Vec::with_capacity(keep)),
        lambda: (config.record_lambda && common.has_lambda()).then(|| Vec::with_capacity(keep * n)),
        seed: rng.seed(),
        stream_id: rng.stream_id(),
        loss: common.loss,
        prior: spec.prior_name(),
        include_intercept: common.include_intercept,
    };

    for iteration in 0..config.n_burnin + keep {
        driver
            .step(&mut state, rng)
            .and_then(|_| state.check())
            .map_err(|e| Error::Sampler { iteration, source: Box::new(e) })?;
        if iteration < config.n_burnin {
            continue;
        }
        draws.beta.extend_from_slice(&state.beta);
        if let Some(g) = draws.gamma.as_mut() {
            g.extend_from_slice(&state.gamma);
        }
        draws.mu.push(state.mu);
        draws.sigma2.push(state.sigma2);
        draws.alpha2.push(state.alpha2);
        if let Some(q) = draws.q.as_mut() {
            q.push(state.q);
        }
        if let Some(l) = draws.lambda.as_mut() {
            l.extend_from_slice(&state.lambda);
        }
    }
    Ok(draws)
}

/// [`run_chain`] on the stream `(config.seed, stream_id)`.
pub fn fit(data: &Dataset, spec: &ModelSpec, config: &McmcConfig, stream_id: u64) -> Result<PosteriorDraws> {
    let mut rng = RngStream::new(config.seed, stream_id);
    run_chain(data, spec, config, &mut rng)
}
