//! Run configuration: a TOML file with dotted key paths, overridable by
//! `key.path=value` assignments. Unknown keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CommonSpec, McmcConfig, ModelSpec, PriorPrecision, RidgeSpec, SpikeSlabSpec, UpdateOrder};
use crate::sph::LossKind;
use crate::synthetic::SimSetting;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PriorKind {
    #[default]
    Ridge,
    SpikeSlab,
}

/// Flat description of one model; converts into a [`ModelSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    /// Label used in output tables; defaults to `<loss>_<prior>`.
    pub name: Option<String>,
    pub prior: PriorKind,
    pub loss: LossKind,
    pub include_intercept: bool,
    pub tau_mu2: f64,
    pub include_sigma: bool,
    pub a_sigma: f64,
    pub b_sigma: f64,
    pub a_alpha: f64,
    pub b_alpha: f64,
    pub fixed_alpha2: Option<f64>,
    /// Isotropic ridge precision.
    pub ridge_precision: f64,
    pub beta0: Vec<f64>,
    pub tau2: f64,
    pub a_q: f64,
    pub b_q: f64,
    pub update_order: UpdateOrder,
    pub fixed_q: Option<f64>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let common = CommonSpec::default();
        let ss = SpikeSlabSpec::default();
        Self {
            name: None,
            prior: PriorKind::Ridge,
            loss: common.loss,
            include_intercept: common.include_intercept,
            tau_mu2: common.tau_mu2,
            include_sigma: common.include_sigma,
            a_sigma: common.a_sigma,
            b_sigma: common.b_sigma,
            a_alpha: common.a_alpha,
            b_alpha: common.b_alpha,
            fixed_alpha2: common.fixed_alpha2,
            ridge_precision: 0.01,
            beta0: Vec::new(),
            tau2: ss.tau2,
            a_q: ss.a_q,
            b_q: ss.b_q,
            update_order: ss.update_order,
            fixed_q: ss.fixed_q,
        }
    }
}

impl ModelConfig {
    pub fn new(loss: LossKind, prior: PriorKind) -> Self {
        Self { loss, prior, ..Default::default() }
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            let prior = match self.prior {
                PriorKind::Ridge => "ridge",
                PriorKind::SpikeSlab => "ss",
            };
            format!("{}_{prior}", self.loss.name())
        })
    }

    pub fn to_spec(&self) -> Result<ModelSpec> {
        let common = CommonSpec {
            loss: self.loss,
            include_intercept: self.include_intercept,
            tau_mu2: self.tau_mu2,
            include_sigma: self.include_sigma,
            a_sigma: self.a_sigma,
            b_sigma: self.b_sigma,
            a_alpha: self.a_alpha,
            b_alpha: self.b_alpha,
            fixed_alpha2: self.fixed_alpha2,
        };
        common.validate()?;
        let spec = match self.prior {
            PriorKind::Ridge => ModelSpec::Ridge(RidgeSpec {
                common,
                beta0: self.beta0.clone(),
                precision: PriorPrecision::Isotropic(self.ridge_precision),
            }),
            PriorKind::SpikeSlab => {
                let s = SpikeSlabSpec {
                    common,
                    tau2: self.tau2,
                    a_q: self.a_q,
                    b_q: self.b_q,
                    update_order: self.update_order,
                    fixed_q: self.fixed_q,
                };
                s.validate()?;
                ModelSpec::SpikeSlab(s)
            }
        };
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    pub path: Option<PathBuf>,
    pub response: Option<String>,
    /// Column carried as a label and excluded from the predictors.
    pub index: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Credible level of reported intervals.
    pub level: f64,
    pub write_draws: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { level: 0.9, write_draws: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForecastConfig {
    /// Rows per estimation window.
    pub window: usize,
    /// Row of the first window start.
    pub start: usize,
    /// Number of forecast origins; all that fit when absent.
    pub n_origins: Option<usize>,
    /// Also refit each window after dropping flagged observations.
    pub filtered: bool,
    /// Model label whose prediction error scales the others.
    pub baseline: Option<String>,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        Self { window: 40, start: 0, n_origins: None, filtered: false, baseline: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    /// Replicates per setting; overrides each setting's own count.
    pub replicates: Option<usize>,
    pub level: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { replicates: None, level: 0.9 }
    }
}

/// Every section any subcommand may read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub data: DataConfig,
    pub model: ModelConfig,
    /// Models compared by `bench` and `forecast`.
    pub models: Vec<ModelConfig>,
    pub mcmc: McmcConfig,
    pub output: OutputConfig,
    /// Design used by `simulate`.
    pub setting: SimSetting,
    /// Designs used by `bench`.
    pub settings: Vec<SimSetting>,
    pub bench: BenchConfig,
    pub forecast: ForecastConfig,
}

impl RunConfig {
    /// Parses TOML text, applies the overrides in order, then deserializes.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e| Error::Input(format!("config: {e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut config: RunConfig =
            toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Input(format!("config: {e}")))?;
        if let Some(seed) = config.seed {
            config.mcmc.seed = seed;
        }
        Ok(config)
    }

    /// Canonical text whose hash identifies the run.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Models for multi-model commands; the single `model` when none listed.
    pub fn model_list(&self) -> Vec<ModelConfig> {
        if self.models.is_empty() {
            vec![self.model.clone()]
        } else {
            self.models.clone()
        }
    }
}

/// Applies `a.b.c=value`. The value is read as a TOML value and falls back
/// to a bare string. Numeric segments index into arrays.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Input(format!("override '{assignment}' is not of the form key=value")))?;
    let path: Vec<&str> = path.trim().split('.').collect();
    if path.iter().any(|s| s.is_empty()) {
        return Err(Error::Input(format!("override '{assignment}' has an empty key segment")));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));

    let mut root = toml::Value::Table(std::mem::take(table));
    let result = assign(&mut root, &path, value, assignment);
    if let toml::Value::Table(t) = root {
        *table = t;
    }
    result
}

fn assign(mut node: &mut toml::Value, path: &[&str], value: toml::Value, assignment: &str) -> Result<()> {
    let (last, parents) = path.split_last().expect("non-empty path");
    for seg in parents {
        node = match node {
            toml::Value::Table(t) => t.entry(seg.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new())),
            toml::Value::Array(a) => {
                let len = a.len();
                a.get_mut(array_index(seg, len, assignment)?).expect("index checked")
            }
            _ => return Err(Error::Input(format!("override '{assignment}': '{seg}' is below a scalar"))),
        };
    }
    match node {
        toml::Value::Table(t) => {
            t.insert(last.to_string(), value);
        }
        toml::Value::Array(a) => {
            let len = a.len();
            a[array_index(last, len, assignment)?] = value;
        }
        _ => return Err(Error::Input(format!("override '{assignment}': '{last}' is below a scalar"))),
    }
    Ok(())
}

fn array_index(seg: &str, len: usize, assignment: &str) -> Result<usize> {
    let i: usize =
        seg.parse().map_err(|_| Error::Input(format!("override '{assignment}': '{seg}' is not an array index")))?;
    if i >= len {
        return Err(Error::Input(format!("override '{assignment}': index {i} out of range ({len})")));
    }
    Ok(i)
}
