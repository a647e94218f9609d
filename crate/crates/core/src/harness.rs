//! Simulation benchmark: every (setting, replicate, model) task simulates a
//! training and a test set, fits the model and scores it. Tasks run on the
//! worker pool and each owns a random stream keyed by its identifiers, so
//! results do not depend on scheduling.
//!
//! With an output directory the per-task rows are appended to
//! `replicates.csv` as tasks finish; rerunning skips tasks already there.

use std::collections::{HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::distributions::{stream_key, RngStream};
use crate::error::{Error, Result};
use crate::exec::map_tasks;
use crate::io::{fmt_f64, sha256_hex, MetricRow};
use crate::metrics;
use crate::model::{McmcConfig, ModelSpec};
use crate::sampler::run_chain;
use crate::stats::median;
use crate::synthetic::{generate_dataset_rows, SimSetting};

pub const REPLICATES_FILE: &str = "replicates.csv";
pub const METRICS_FILE: &str = "metrics.csv";

/// Metric name marking a finished task: 1 on success, 0 on failure.
const STATUS: &str = "status";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchModel {
    pub label: String,
    pub spec: ModelSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPlan {
    pub settings: Vec<SimSetting>,
    pub models: Vec<BenchModel>,
    pub mcmc: McmcConfig,
    pub seed: u64,
    /// Overrides each setting's replicate count.
    pub replicates: Option<usize>,
    pub level: f64,
    pub threads: usize,
}

impl BenchPlan {
    fn replicates_for(&self, s: &SimSetting) -> usize {
        self.replicates.unwrap_or(s.n_replicates)
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        for s in &self.settings {
            s.validate()?;
            if !ids.insert(&s.id) {
                return Err(Error::Input(format!("duplicate setting id '{}'", s.id)));
            }
        }
        let mut labels = HashSet::new();
        for m in &self.models {
            if !labels.insert(&m.label) {
                return Err(Error::Input(format!("duplicate model label '{}'", m.label)));
            }
        }
        if self.models.is_empty() || self.settings.is_empty() {
            return Err(Error::Input("bench needs at least one setting and one model".into()));
        }
        self.mcmc.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRow {
    pub setting_id: String,
    pub replicate: usize,
    pub model: String,
    pub metric: String,
    pub coordinate: String,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Task {
    setting: usize,
    replicate: usize,
    model: usize,
}

fn id_hash(s: &str) -> u64 {
    u64::from_str_radix(&sha256_hex(s.as_bytes())[..16], 16).expect("hex digest")
}

/// Stream of the simulated data for one replicate; shared by all models.
pub fn data_stream(seed: u64, setting: &SimSetting, replicate: usize) -> RngStream {
    RngStream::new(seed, stream_key(&[id_hash(&setting.id), setting.seed, replicate as u64, 0]))
}

/// Stream of the chain fitted by `model` to one replicate.
pub fn chain_stream(seed: u64, setting: &SimSetting, replicate: usize, model: &str) -> RngStream {
    RngStream::new(seed, stream_key(&[id_hash(&setting.id), setting.seed, replicate as u64, 1, id_hash(model)]))
}

/// Fits one model to one replicate and returns its metric rows (without
/// the status row).
pub fn run_replicate(
    plan: &BenchPlan,
    setting: &SimSetting,
    replicate: usize,
    model: &BenchModel,
) -> Result<Vec<ReplicateRow>> {
    let mut rng = data_stream(plan.seed, setting, replicate);
    let train = generate_dataset_rows(setting, setting.n, &mut rng)?;
    let test = generate_dataset_rows(setting, setting.n_test, &mut rng)?;
    let mut mcmc = plan.mcmc.clone();
    mcmc.record_lambda = false;
    let draws =
        run_chain(&train.data, &model.spec, &mcmc, &mut chain_stream(plan.seed, setting, replicate, &model.label))?;

    let names = &train.data.predictor_names;
    let mut rows = Vec::new();
    let mut push = |metric: &str, coordinate: &str, value: f64| {
        rows.push(ReplicateRow {
            setting_id: setting.id.clone(),
            replicate,
            model: model.label.clone(),
            metric: metric.into(),
            coordinate: coordinate.into(),
            value,
        })
    };
    for (j, v) in metrics::posterior_mse(&draws, &train.beta_true)?.into_iter().enumerate() {
        push("posterior_mse", &names[j], v);
    }
    if setting.n_test > 0 {
        push("prediction_mse", "mean", crate::stats::mean(&metrics::prediction_mse(&draws, &test.data)?));
    }
    let s2 = metrics::sandwich_scale(&draws, model.spec.common().samples_sigma());
    let sandwich = metrics::sandwich_covariance(&draws.beta_covariance(), &train.data.x, s2)?;
    let mean = draws.beta_mean();
    for (j, name) in names.iter().enumerate() {
        let truth = train.beta_true[j];
        let et = metrics::credible_interval(&draws, j, plan.level)?;
        push("covered_equi_tailed", name, f64::from(u8::from(et.contains(truth))));
        push("length_equi_tailed", name, et.length());
        let sw = metrics::sandwich_interval_from(&mean, &sandwich, j, plan.level)?;
        push("covered_sandwich", name, f64::from(u8::from(sw.contains(truth))));
        push("length_sandwich", name, sw.length());
    }
    if let Some(incl) = draws.inclusion_probabilities() {
        let selected: Vec<bool> = incl.iter().map(|p| *p > 0.5).collect();
        let truth: Vec<bool> = train.beta_true.iter().map(|b| *b != 0.0).collect();
        push("mcc", "all", metrics::mcc(&selected, &truth)?);
    }
    Ok(rows)
}

fn status_row(setting: &SimSetting, replicate: usize, model: &BenchModel, ok: bool) -> ReplicateRow {
    ReplicateRow {
        setting_id: setting.id.clone(),
        replicate,
        model: model.label.clone(),
        metric: STATUS.into(),
        coordinate: "all".into(),
        value: f64::from(u8::from(ok)),
    }
}

fn write_rows<W: Write>(w: &mut csv::Writer<W>, rows: &[ReplicateRow]) -> Result<()> {
    for r in rows {
        w.write_record([
            r.setting_id.as_str(),
            &r.replicate.to_string(),
            &r.model,
            &r.metric,
            &r.coordinate,
            &fmt_f64(r.value),
        ])?;
    }
    Ok(())
}

const HEADER: [&str; 6] = ["setting_id", "replicate", "model", "metric", "coordinate", "value"];

pub fn read_replicate_rows(path: &Path) -> Result<Vec<ReplicateRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutput {
    /// Per-task rows in (setting, replicate, model) order.
    pub replicate_rows: Vec<ReplicateRow>,
    pub metric_rows: Vec<MetricRow>,
}

/// Runs every task not already recorded under `dir` and aggregates.
pub fn run_bench(plan: &BenchPlan, dir: Option<&Path>) -> Result<BenchOutput> {
    plan.validate()?;
    let mut tasks = Vec::new();
    for (si, s) in plan.settings.iter().enumerate() {
        for r in 0..plan.replicates_for(s) {
            for mi in 0..plan.models.len() {
                tasks.push(Task { setting: si, replicate: r, model: mi });
            }
        }
    }
    let key_of = |row: &ReplicateRow| -> Option<Task> {
        let setting = plan.settings.iter().position(|s| s.id == row.setting_id)?;
        let model = plan.models.iter().position(|m| m.label == row.model)?;
        Some(Task { setting, replicate: row.replicate, model })
    };

    let mut done: HashMap<Task, Vec<ReplicateRow>> = HashMap::new();
    let mut sink = None;
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(REPLICATES_FILE);
        if path.exists() {
            let mut pending: HashMap<Task, Vec<ReplicateRow>> = HashMap::new();
            for row in read_replicate_rows(&path)? {
                let Some(key) = key_of(&row) else { continue };
                let finished = row.metric == STATUS;
                pending.entry(key).or_default().push(row);
                if finished {
                    let rows = pending.remove(&key).unwrap_or_default();
                    done.insert(key, rows);
                }
            }
            // Rows of tasks without a status line were interrupted mid-write.
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(HEADER)?;
            for t in &tasks {
                if let Some(rows) = done.get(t) {
                    write_rows(&mut w, rows)?;
                }
            }
            w.flush()?;
        } else {
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(HEADER)?;
            w.flush()?;
        }
        let file = OpenOptions::new().append(true).open(&path)?;
        sink = Some(Mutex::new(csv::WriterBuilder::new().has_headers(false).from_writer(file)));
    }

    let todo: Vec<Task> = tasks.iter().copied().filter(|t| !done.contains_key(t)).collect();
    log::info!("bench: {} tasks, {} already recorded", tasks.len(), tasks.len() - todo.len());
    let results = map_tasks(&todo, plan.threads, |t| -> Result<(Task, Vec<ReplicateRow>)> {
        let setting = &plan.settings[t.setting];
        let model = &plan.models[t.model];
        let mut rows = match run_replicate(plan, setting, t.replicate, model) {
            Ok(rows) => rows,
            Err(e) => {
                log::warn!("setting {} replicate {} model {} failed: {e}", setting.id, t.replicate, model.label);
                Vec::new()
            }
        };
        let ok = !rows.is_empty();
        rows.push(status_row(setting, t.replicate, model, ok));
        if let Some(sink) = &sink {
            let mut w = sink.lock().expect("collector lock");
            write_rows(&mut w, &rows)?;
            w.flush()?;
        }
        Ok((*t, rows))
    })?;
    for r in results {
        let (t, rows) = r?;
        done.insert(t, rows);
    }
    drop(sink);

    let replicate_rows: Vec<ReplicateRow> = tasks.iter().flat_map(|t| done.remove(t).unwrap_or_default()).collect();
    let metric_rows = aggregate(plan, &replicate_rows);
    if let Some(dir) = dir {
        let mut w = csv::Writer::from_writer(File::create(dir.join(REPLICATES_FILE))?);
        w.write_record(HEADER)?;
        write_rows(&mut w, &replicate_rows)?;
        w.flush()?;
        crate::io::write_metric_rows(File::create(dir.join(METRICS_FILE))?, &metric_rows)?;
    }
    Ok(BenchOutput { replicate_rows, metric_rows })
}

/// Summaries over replicates for each (setting, model):
/// medians of posterior MSE per coordinate and the median over signal
/// coordinates of those medians, median prediction MSE, interval coverage
/// and mean length per coordinate, median MCC and replicate counts.
pub fn aggregate(plan: &BenchPlan, rows: &[ReplicateRow]) -> Vec<MetricRow> {
    let mut out = Vec::new();
    for s in &plan.settings {
        let beta = crate::synthetic::beta_true(s);
        let names: Vec<String> = (1..=s.p).map(|j| format!("x{j}")).collect();
        for m in &plan.models {
            let mine: Vec<&ReplicateRow> = rows.iter().filter(|r| r.setting_id == s.id && r.model == m.label).collect();
            let values = |metric: &str, coord: &str| -> Vec<f64> {
                mine.iter().filter(|r| r.metric == metric && r.coordinate == coord).map(|r| r.value).collect()
            };
            let mut push = |metric: &str, coordinate: &str, value: f64| {
                out.push(MetricRow {
                    setting_id: s.id.clone(),
                    model: m.label.clone(),
                    metric: metric.into(),
                    coordinate: coordinate.into(),
                    value,
                })
            };
            let ok = values(STATUS, "all");
            push("replicates_ok", "all", ok.iter().filter(|v| **v == 1.0).count() as f64);
            push("replicates_failed", "all", ok.iter().filter(|v| **v == 0.0).count() as f64);
            if ok.iter().all(|v| *v == 0.0) {
                continue;
            }
            let med = |xs: Vec<f64>| if xs.is_empty() { f64::NAN } else { median(&xs) };

            let per_coord: Vec<f64> = names.iter().map(|n| med(values("posterior_mse", n))).collect();
            let signal: Vec<f64> = per_coord.iter().zip(&beta).filter(|(_, b)| **b != 0.0).map(|(v, _)| *v).collect();
            push("median_posterior_mse", "signal", if signal.is_empty() { f64::NAN } else { median(&signal) });
            for (n, v) in names.iter().zip(&per_coord) {
                push("median_posterior_mse", n, *v);
            }
            let pred = values("prediction_mse", "mean");
            if !pred.is_empty() {
                push("median_prediction_mse", "all", median(&pred));
            }
            for kind in ["equi_tailed", "sandwich"] {
                for n in &names {
                    let covered = values(&format!("covered_{kind}"), n);
                    let lengths = values(&format!("length_{kind}"), n);
                    let (cov, len) = if covered.is_empty() {
                        (f64::NAN, f64::NAN)
                    } else {
                        (crate::stats::mean(&covered), crate::stats::mean(&lengths))
                    };
                    push(&format!("coverage_{kind}"), n, cov);
                    push(&format!("mean_length_{kind}"), n, len);
                }
            }
            let mcc = values("mcc", "all");
            if !mcc.is_empty() {
                push("median_mcc", "all", median(&mcc));
            }
        }
    }
    out
}
