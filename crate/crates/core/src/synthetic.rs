//! Simulated regression designs: serially dependent errors with a chosen
//! marginal, VAR(1) predictors and the two coefficient patterns.
//!
//! Non-Gaussian errors with serial dependence come from a Gaussian copula:
//! a stationary AR(1) standard normal driver `z_i` is mapped through the
//! target quantile function. Two-component mixtures draw iid component
//! labels; the normal component takes `z_i` itself and the contaminant is
//! drawn independently, so the marginal is exactly the mixture and the
//! normal part keeps the lag-1 dependence.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::distributions::{standard_normal, RngStream};
use crate::error::{Error, Result};
use crate::model::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ErrorDist {
    #[default]
    Normal,
    StudentT {
        df: f64,
    },
    /// `weight N(0, 1) + (1 - weight) Cauchy(0, scale)`.
    MixNormalCauchy {
        weight: f64,
        scale: f64,
    },
    /// `weight N(0, 1) + (1 - weight) N(0, sd^2)`.
    MixNormalWideNormal {
        weight: f64,
        sd: f64,
    },
    /// `weight N(0, 1) + (1 - weight) U(-half_width, half_width)`.
    MixNormalUniform {
        weight: f64,
        half_width: f64,
    },
}

impl ErrorDist {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Input(m));
        match *self {
            ErrorDist::Normal => Ok(()),
            ErrorDist::StudentT { df } if !(df >= 1.0 && df.is_finite()) => {
                bad(format!("t degrees of freedom must be >= 1, got {df}"))
            }
            ErrorDist::StudentT { .. } => Ok(()),
            ErrorDist::MixNormalCauchy { weight, scale: s }
            | ErrorDist::MixNormalWideNormal { weight, sd: s }
            | ErrorDist::MixNormalUniform { weight, half_width: s } => {
                if !(weight > 0.0 && weight < 1.0) {
                    bad(format!("mixture weight must lie in (0, 1), got {weight}"))
                } else if !(s > 0.0 && s.is_finite()) {
                    bad(format!("mixture scale must be positive, got {s}"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Weight of the standard normal component; 1 for the non-mixtures.
    pub fn normal_weight(&self) -> f64 {
        match *self {
            ErrorDist::MixNormalCauchy { weight, .. }
            | ErrorDist::MixNormalWideNormal { weight, .. }
            | ErrorDist::MixNormalUniform { weight, .. } => weight,
            _ => 1.0,
        }
    }

    /// Marginal distribution function.
    pub fn cdf(&self, x: f64) -> f64 {
        let phi = std_normal().cdf(x);
        match *self {
            ErrorDist::Normal => phi,
            ErrorDist::StudentT { df } => student(df).cdf(x),
            ErrorDist::MixNormalCauchy { weight, scale } => {
                weight * phi + (1.0 - weight) * (0.5 + (x / scale).atan() / std::f64::consts::PI)
            }
            ErrorDist::MixNormalWideNormal { weight, sd } => weight * phi + (1.0 - weight) * std_normal().cdf(x / sd),
            ErrorDist::MixNormalUniform { weight, half_width } => {
                let u = ((x + half_width) / (2.0 * half_width)).clamp(0.0, 1.0);
                weight * phi + (1.0 - weight) * u
            }
        }
    }

    fn contaminant(&self, rng: &mut RngStream) -> f64 {
        match *self {
            ErrorDist::MixNormalCauchy { scale, .. } => scale * (std::f64::consts::PI * (rng.open01() - 0.5)).tan(),
            ErrorDist::MixNormalWideNormal { sd, .. } => sd * standard_normal(rng),
            ErrorDist::MixNormalUniform { half_width, .. } => half_width * (2.0 * rng.open01() - 1.0),
            _ => unreachable!("only mixtures have a contaminant"),
        }
    }
}

fn std_normal() -> Normal {
    Normal::standard()
}

fn student(df: f64) -> StudentsT {
    StudentsT::new(0.0, 1.0, df).expect("validated degrees of freedom")
}

fn student_quantile(df: f64, z: f64) -> f64 {
    let u = std_normal().cdf(z);
    if df == 1.0 {
        // Cauchy: tan(pi (u - 1/2)), evaluated from the tail nearest to u.
        return (std::f64::consts::PI * (u - 0.5)).tan();
    }
    if df == 2.0 {
        return (2.0 * u - 1.0) / (2.0 * u * (1.0 - u)).sqrt();
    }
    student(df).inverse_cdf(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BetaPattern {
    /// `0.5 + (j - 1) 2 / (p - 1)`, from 0.5 to 2.5.
    #[default]
    Dense,
    /// The first `ceil(p / 20)` coefficients equal 2, the rest 0.
    Sparse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSetting {
    pub id: String,
    pub n: usize,
    pub p: usize,
    /// Lag-1 correlation of the error driver.
    pub rho_eps: f64,
    /// Lag-1 correlation of each predictor.
    pub rho_x: f64,
    /// Contemporaneous predictor equicorrelation; defaults to `rho_x`.
    pub rho_x_cross: Option<f64>,
    pub error: ErrorDist,
    pub beta_pattern: BetaPattern,
    /// Overrides the pattern when given.
    pub beta: Option<Vec<f64>>,
    pub n_test: usize,
    pub n_replicates: usize,
    pub seed: u64,
}

impl Default for SimSetting {
    fn default() -> Self {
        Self {
            id: "setting".into(),
            n: 100,
            p: 10,
            rho_eps: 0.0,
            rho_x: 0.0,
            rho_x_cross: None,
            error: ErrorDist::Normal,
            beta_pattern: BetaPattern::Dense,
            beta: None,
            n_test: 100,
            n_replicates: 20,
            seed: 0,
        }
    }
}

impl SimSetting {
    pub fn cross_correlation(&self) -> f64 {
        self.rho_x_cross.unwrap_or(self.rho_x)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_design()?;
        if self.beta.is_none() && self.beta_pattern == BetaPattern::Dense && self.p < 2 {
            return Err(Error::Input("the dense coefficient pattern needs p >= 2".into()));
        }
        if let Some(b) = &self.beta {
            if b.len() != self.p {
                return Err(Error::Dimension(format!("beta has length {}, expected p = {}", b.len(), self.p)));
            }
        }
        self.error.validate()
    }

    /// Checks only what the predictor and error generators use.
    pub fn validate_design(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::Input("n and p must be positive".into()));
        }
        for (name, r) in [("rho_eps", self.rho_eps), ("rho_x", self.rho_x)] {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::Input(format!("{name} must lie in [0, 1), got {r}")));
            }
        }
        let c = self.cross_correlation();
        let lower = if self.p > 1 { -1.0 / (self.p as f64 - 1.0) } else { -1.0 };
        if !(c > lower && c < 1.0) {
            return Err(Error::Domain(format!(
                "predictor equicorrelation {c} gives a singular innovation covariance for p = {}",
                self.p
            )));
        }
        Ok(())
    }
}

/// True coefficients for the setting.
pub fn beta_true(setting: &SimSetting) -> Vec<f64> {
    if let Some(b) = &setting.beta {
        return b.clone();
    }
    let p = setting.p;
    match setting.beta_pattern {
        BetaPattern::Dense => (0..p).map(|j| 0.5 + j as f64 * 2.0 / (p as f64 - 1.0)).collect(),
        BetaPattern::Sparse => {
            let k = p.div_ceil(20);
            (0..p).map(|j| if j < k { 2.0 } else { 0.0 }).collect()
        }
    }
}

/// Stationary AR(1) standard normal sequence.
fn ar1_driver(n: usize, rho: f64, rng: &mut RngStream) -> Vec<f64> {
    let innov = (1.0 - rho * rho).sqrt();
    let mut z = Vec::with_capacity(n);
    let mut prev = standard_normal(rng);
    z.push(prev);
    for _ in 1..n {
        prev = rho * prev + innov * standard_normal(rng);
        z.push(prev);
    }
    z
}

/// Errors and their contamination labels (`true` for the mixture's
/// non-normal component).
pub fn generate_errors_labeled(setting: &SimSetting, n: usize, rng: &mut RngStream) -> Result<(Vec<f64>, Vec<bool>)> {
    setting.validate_design()?;
    setting.error.validate()?;
    let z = ar1_driver(n, setting.rho_eps, rng);
    let mut labels = vec![false; n];
    let eps = match setting.error {
        ErrorDist::Normal => z,
        ErrorDist::StudentT { df } => z.into_iter().map(|v| student_quantile(df, v)).collect(),
        dist => {
            let w = dist.normal_weight();
            z.into_iter()
                .zip(labels.iter_mut())
                .map(|(v, label)| {
                    if rng.open01() < w {
                        v
                    } else {
                        *label = true;
                        dist.contaminant(rng)
                    }
                })
                .collect()
        }
    };
    Ok((eps, labels))
}

pub fn generate_errors(setting: &SimSetting, rng: &mut RngStream) -> Result<Vec<f64>> {
    generate_errors_labeled(setting, setting.n, rng).map(|(e, _)| e)
}

/// `n x p` stationary Gaussian VAR(1) with diagonal transition `rho_x I` and
/// equicorrelated innovations `(1 - rho_x^2) S`, `S` the target correlation.
pub fn generate_predictors_rows(setting: &SimSetting, n: usize, rng: &mut RngStream) -> Result<DMatrix<f64>> {
    setting.validate_design()?;
    let p = setting.p;
    let (rho, c) = (setting.rho_x, setting.cross_correlation());
    let innov = (1.0 - rho * rho).sqrt();
    let mut x = DMatrix::zeros(n, p);
    let mut row = vec![0.0; p];
    let draw = |rng: &mut RngStream, out: &mut [f64]| {
        // Equicorrelated N(0, S): a shared factor plus idiosyncratic noise.
        // Negative c: sqrt(1 - c) (z_j - zbar) + sqrt(1 + (p - 1) c) zbar.
        if c >= 0.0 {
            let common = c.sqrt() * standard_normal(rng);
            let own = (1.0 - c).sqrt();
            out.iter_mut().for_each(|o| *o = common + own * standard_normal(rng));
        } else {
            let zs: Vec<f64> = (0..p).map(|_| standard_normal(rng)).collect();
            let zbar = zs.iter().sum::<f64>() / p as f64;
            let shared = (1.0 + (p as f64 - 1.0) * c).sqrt() * zbar;
            for (o, z) in out.iter_mut().zip(&zs) {
                *o = (1.0 - c).sqrt() * (z - zbar) + shared;
            }
        }
    };
    let mut shock = vec![0.0; p];
    for i in 0..n {
        draw(rng, &mut shock);
        for j in 0..p {
            row[j] = if i == 0 { shock[j] } else { rho * row[j] + innov * shock[j] };
            x[(i, j)] = row[j];
        }
    }
    Ok(x)
}

pub fn generate_predictors(setting: &SimSetting, rng: &mut RngStream) -> Result<DMatrix<f64>> {
    generate_predictors_rows(setting, setting.n, rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedData {
    pub data: Dataset,
    pub beta_true: Vec<f64>,
    pub contaminated: Vec<bool>,
}

/// `y = X beta + e` with `n` rows.
pub fn generate_dataset_rows(setting: &SimSetting, n: usize, rng: &mut RngStream) -> Result<SimulatedData> {
    setting.validate()?;
    let x = generate_predictors_rows(setting, n, rng)?;
    let (eps, contaminated) = generate_errors_labeled(setting, n, rng)?;
    let beta = beta_true(setting);
    let y: Vec<f64> = (0..n).map(|i| (0..setting.p).map(|j| x[(i, j)] * beta[j]).sum::<f64>() + eps[i]).collect();
    let names = (1..=setting.p).map(|j| format!("x{j}")).collect();
    let data = Dataset::with_names(y, x, names, "y".into())?;
    Ok(SimulatedData { data, beta_true: beta, contaminated })
}

pub fn generate_dataset(setting: &SimSetting, rng: &mut RngStream) -> Result<SimulatedData> {
    generate_dataset_rows(setting, setting.n, rng)
}
