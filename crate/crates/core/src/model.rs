//! Data, model specifications, chain state and retained draws.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DEFAULT_JITTER_MAX, DEFAULT_JITTER_START};
use crate::sph::LossKind;

/// Response vector and predictor matrix (`n x p`, column-major).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub y: Vec<f64>,
    pub x: DMatrix<f64>,
    pub predictor_names: Vec<String>,
    pub response_name: String,
}

impl Dataset {
    pub fn new(y: Vec<f64>, x: DMatrix<f64>) -> Result<Self> {
        let names = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
        Self::with_names(y, x, names, "y".into())
    }

    pub fn with_names(
        y: Vec<f64>,
        x: DMatrix<f64>,
        predictor_names: Vec<String>,
        response_name: String,
    ) -> Result<Self> {
        if y.len() != x.nrows() {
            return Err(Error::Dimension(format!("response has {} rows, predictors have {}", y.len(), x.nrows())));
        }
        if predictor_names.len() != x.ncols() {
            return Err(Error::Dimension(format!(
                "{} predictor names for {} columns",
                predictor_names.len(),
                x.ncols()
            )));
        }
        if y.iter().chain(x.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Input("data contain non-finite values".into()));
        }
        Ok(Self { y, x, predictor_names, response_name })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Rows with the given indices, in order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let x = DMatrix::from_fn(rows.len(), self.p(), |i, j| self.x[(rows[i], j)]);
        Dataset {
            y: rows.iter().map(|&i| self.y[i]).collect(),
            x,
            predictor_names: self.predictor_names.clone(),
            response_name: self.response_name.clone(),
        }
    }

    /// All rows except the given ones.
    pub fn without_rows(&self, drop: &[usize]) -> Dataset {
        let mut keep = vec![true; self.n()];
        for &i in drop {
            if i < keep.len() {
                keep[i] = false;
            }
        }
        let rows: Vec<usize> = (0..self.n()).filter(|&i| keep[i]).collect();
        self.select_rows(&rows)
    }
}

/// Settings shared by the ridge and spike-and-slab models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CommonSpec {
    pub loss: LossKind,
    pub include_intercept: bool,
    /// Prior variance of the intercept (scaled by sigma^2).
    pub tau_mu2: f64,
    /// Sample a global scale sigma^2. Always on for the `L2` loss, whose
    /// common error variance plays this role.
    pub include_sigma: bool,
    pub a_sigma: f64,
    pub b_sigma: f64,
    /// Gamma(shape, rate) prior on alpha^2.
    pub a_alpha: f64,
    pub b_alpha: f64,
    /// Hold alpha^2 at this value instead of sampling it.
    pub fixed_alpha2: Option<f64>,
}

impl Default for CommonSpec {
    fn default() -> Self {
        Self {
            loss: LossKind::Sph,
            include_intercept: true,
            tau_mu2: 100.0 * 100.0,
            include_sigma: false,
            a_sigma: 0.01,
            b_sigma: 0.01,
            a_alpha: 0.01,
            b_alpha: 0.01,
            fixed_alpha2: None,
        }
    }
}

impl CommonSpec {
    pub fn validate(&self) -> Result<()> {
        if matches!(self.loss, LossKind::Huber) {
            return Err(Error::Unsupported("the Huber loss has no sampler; use sph, unscaled_ph, l1 or l2".into()));
        }
        for (name, v) in [
            ("tau_mu2", self.tau_mu2),
            ("a_sigma", self.a_sigma),
            ("b_sigma", self.b_sigma),
            ("a_alpha", self.a_alpha),
            ("b_alpha", self.b_alpha),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Input(format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(a2) = self.fixed_alpha2 {
            if !(a2 > 0.0 && a2.is_finite()) {
                return Err(Error::Input(format!("fixed_alpha2 must be positive, got {a2}")));
            }
        }
        Ok(())
    }

    /// Whether sigma^2 is sampled.
    pub fn samples_sigma(&self) -> bool {
        self.include_sigma || self.loss == LossKind::L2
    }

    /// Whether alpha^2 is sampled.
    pub fn samples_alpha(&self) -> bool {
        matches!(self.loss, LossKind::Sph | LossKind::UnscaledPh) && self.fixed_alpha2.is_none()
    }

    /// Whether the model carries observation-level scales.
    pub fn has_lambda(&self) -> bool {
        self.loss != LossKind::L2
    }
}

/// Gaussian prior `beta ~ N(beta0, sigma^2 Q^{-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeSpec {
    pub common: CommonSpec,
    /// Prior mean; empty means zero.
    pub beta0: Vec<f64>,
    pub precision: PriorPrecision,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PriorPrecision {
    /// `Q = c I`.
    Isotropic(f64),
    Matrix(DMatrix<f64>),
}

impl Default for RidgeSpec {
    fn default() -> Self {
        Self { common: CommonSpec::default(), beta0: Vec::new(), precision: PriorPrecision::Isotropic(0.01) }
    }
}

impl RidgeSpec {
    pub fn with_loss(loss: LossKind) -> Self {
        let mut s = Self::default();
        s.common.loss = loss;
        s
    }

    pub fn precision_matrix(&self, p: usize) -> Result<DMatrix<f64>> {
        match &self.precision {
            PriorPrecision::Isotropic(c) => {
                if !(*c > 0.0 && c.is_finite()) {
                    return Err(Error::Input(format!("prior precision must be positive, got {c}")));
                }
                Ok(DMatrix::identity(p, p) * *c)
            }
            PriorPrecision::Matrix(q) => {
                if q.nrows() != p || q.ncols() != p {
                    return Err(Error::Dimension(format!(
                        "prior precision is {}x{}, expected {p}x{p}",
                        q.nrows(),
                        q.ncols()
                    )));
                }
                if (q - q.transpose()).amax() > 1e-10 * q.amax().max(1.0) {
                    return Err(Error::Input("prior precision must be symmetric".into()));
                }
                Ok(q.clone())
            }
        }
    }

    pub fn prior_mean(&self, p: usize) -> Result<DVector<f64>> {
        if self.beta0.is_empty() {
            return Ok(DVector::zeros(p));
        }
        if self.beta0.len() != p {
            return Err(Error::Dimension(format!("beta0 has length {}, expected {p}", self.beta0.len())));
        }
        Ok(DVector::from_column_slice(&self.beta0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateOrder {
    #[default]
    Fixed,
    Shuffled,
}

/// Point-mass/Gaussian slab prior with `beta_j | gamma_j = 1 ~ N(0, tau2)`
/// and `gamma_j ~ Bernoulli(q)`, `q ~ Beta(a_q, b_q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeSlabSpec {
    pub common: CommonSpec,
    pub tau2: f64,
    pub a_q: f64,
    pub b_q: f64,
    pub update_order: UpdateOrder,
    /// Hold q at this value instead of sampling it.
    pub fixed_q: Option<f64>,
}

impl Default for SpikeSlabSpec {
    fn default() -> Self {
        Self {
            common: CommonSpec::default(),
            tau2: 100.0 * 100.0,
            a_q: 1.0,
            b_q: 1.0,
            update_order: UpdateOrder::Fixed,
            fixed_q: None,
        }
    }
}

impl SpikeSlabSpec {
    pub fn with_loss(loss: LossKind) -> Self {
        let mut s = Self::default();
        s.common.loss = loss;
        s
    }

    pub fn validate(&self) -> Result<()> {
        self.common.validate()?;
        for (name, v) in [("tau2", self.tau2), ("a_q", self.a_q), ("b_q", self.b_q)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Input(format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(q) = self.fixed_q {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::Input(format!("fixed_q must lie in [0, 1], got {q}")));
            }
        }
        Ok(())
    }
}

/// Either prior, with its settings.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Ridge(RidgeSpec),
    SpikeSlab(SpikeSlabSpec),
}

impl ModelSpec {
    pub fn common(&self) -> &CommonSpec {
        match self {
            ModelSpec::Ridge(s) => &s.common,
            ModelSpec::SpikeSlab(s) => &s.common,
        }
    }

    pub fn common_mut(&mut self) -> &mut CommonSpec {
        match self {
            ModelSpec::Ridge(s) => &mut s.common,
            ModelSpec::SpikeSlab(s) => &mut s.common,
        }
    }

    pub fn prior_name(&self) -> &'static str {
        match self {
            ModelSpec::Ridge(_) => "ridge",
            ModelSpec::SpikeSlab(_) => "spike_slab",
        }
    }

    /// Number of coefficients the ridge refit must be able to identify.
    pub fn active_parameters(&self, p: usize) -> usize {
        let intercept = usize::from(self.common().include_intercept);
        match self {
            ModelSpec::Ridge(_) => p + intercept,
            ModelSpec::SpikeSlab(_) => 1 + intercept,
        }
    }
}

/// Current values of every sampled quantity of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub beta: Vec<f64>,
    /// Inclusion indicators; all `true` under the ridge prior.
    pub gamma: Vec<bool>,
    pub mu: f64,
    pub lambda: Vec<f64>,
    pub sigma2: f64,
    pub alpha2: f64,
    pub q: f64,
}

impl ChainState {
    pub fn check(&self) -> Result<()> {
        if self.lambda.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::Domain("non-positive or non-finite lambda in chain state".into()));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::Domain(format!("sigma2 = {}", self.sigma2)));
        }
        if !(self.alpha2 > 0.0 && self.alpha2.is_finite()) {
            return Err(Error::Domain(format!("alpha2 = {}", self.alpha2)));
        }
        if self.beta.iter().any(|b| !b.is_finite()) || !self.mu.is_finite() {
            return Err(Error::Domain("non-finite coefficient in chain state".into()));
        }
        Ok(())
    }
}

/// Chain length and tuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McmcConfig {
    pub n_burnin: usize,
    pub n_draws: usize,
    pub slice_width: f64,
    pub slice_max_steps: usize,
    pub jitter_start: f64,
    pub jitter_max: f64,
    pub seed: u64,
    /// Keep the full `lambda` trajectory (needed by the outlier diagnostic).
    pub record_lambda: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            n_burnin: 5000,
            n_draws: 10000,
            slice_width: 1.0,
            slice_max_steps: 50,
            jitter_start: DEFAULT_JITTER_START,
            jitter_max: DEFAULT_JITTER_MAX,
            seed: 0,
            record_lambda: true,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_draws == 0 {
            return Err(Error::Input("n_draws must be at least 1".into()));
        }
        if !(self.slice_width > 0.0 && self.slice_width.is_finite()) {
            return Err(Error::Input(format!("slice_width must be positive, got {}", self.slice_width)));
        }
        if !(self.jitter_start > 0.0 && self.jitter_start <= self.jitter_max) {
            return Err(Error::Input("jitter_start must be positive and at most jitter_max".into()));
        }
        Ok(())
    }
}

/// Retained post-burn-in draws of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub n_draws: usize,
    pub n: usize,
    pub p: usize,
    /// Row-major `n_draws x p`.
    pub beta: Vec<f64>,
    /// Row-major `n_draws x p`; present for spike-and-slab fits.
    pub gamma: Option<Vec<bool>>,
    pub mu: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub alpha2: Vec<f64>,
    pub q: Option<Vec<f64>>,
    /// Row-major `n_draws x n`; present when recorded and the model has it.
    pub lambda: Option<Vec<f64>>,
    pub seed: u64,
    pub stream_id: u64,
    pub loss: LossKind,
    pub prior: &'static str,
    pub include_intercept: bool,
}

impl PosteriorDraws {
    pub fn beta_draw(&self, k: usize) -> &[f64] {
        &self.beta[k * self.p..(k + 1) * self.p]
    }

    pub fn beta_coordinate(&self, j: usize) -> Vec<f64> {
        (0..self.n_draws).map(|k| self.beta[k * self.p + j]).collect()
    }

    pub fn lambda_observation(&self, i: usize) -> Option<Vec<f64>> {
        let lambda = self.lambda.as_ref()?;
        Some((0..self.n_draws).map(|k| lambda[k * self.n + i]).collect())
    }

    pub fn beta_mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.p];
        for k in 0..self.n_draws {
            for (acc, b) in m.iter_mut().zip(self.beta_draw(k)) {
                *acc += b;
            }
        }
        m.iter_mut().for_each(|v| *v /= self.n_draws as f64);
        m
    }

    /// Sample covariance of the beta draws (divisor `n_draws - 1`, or 1).
    pub fn beta_covariance(&self) -> DMatrix<f64> {
        let mean = self.beta_mean();
        let mut cov = DMatrix::zeros(self.p, self.p);
        for k in 0..self.n_draws {
            let d = DVector::from_iterator(self.p, self.beta_draw(k).iter().zip(&mean).map(|(b, m)| b - m));
            cov.ger(1.0, &d, &d, 1.0);
        }
        cov / (self.n_draws.saturating_sub(1).max(1) as f64)
    }

    /// Posterior inclusion probability per coordinate.
    pub fn inclusion_probabilities(&self) -> Option<Vec<f64>> {
        let gamma = self.gamma.as_ref()?;
        let mut probs = vec![0.0; self.p];
        for k in 0..self.n_draws {
            for j in 0..self.p {
                if gamma[k * self.p + j] {
                    probs[j] += 1.0;
                }
            }
        }
        probs.iter_mut().for_each(|v| *v /= self.n_draws as f64);
        Some(probs)
    }
}
