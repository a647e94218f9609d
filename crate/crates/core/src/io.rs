//! CSV and JSON input/output.
//!
//! Floats are written in scientific notation with 17 significant digits,
//! which round-trips every finite double exactly.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{Dataset, PosteriorDraws};
use crate::stats::{mean, quantile_sorted, variance};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Formats a float so that parsing it back yields the same bits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Rows of a CSV file whose header names the response and, optionally, an
/// index column that is carried along but not used as a predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedData {
    pub data: Dataset,
    pub index: Option<Vec<String>>,
}

pub fn read_dataset<R: Read>(reader: R, response: &str, index: Option<&str>) -> Result<LoadedData> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let y_col =
        find(response).ok_or_else(|| Error::Input(format!("response column '{response}' not found in header")))?;
    let idx_col = match index {
        Some(name) => {
            Some(find(name).ok_or_else(|| Error::Input(format!("index column '{name}' not found in header")))?)
        }
        None => None,
    };
    let x_cols: Vec<usize> = (0..headers.len()).filter(|c| *c != y_col && Some(*c) != idx_col).collect();
    let names: Vec<String> = x_cols.iter().map(|&c| headers[c].to_string()).collect();

    let (mut y, mut xs, mut idx) = (Vec::new(), Vec::new(), Vec::new());
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let parse = |c: usize| -> Result<f64> {
            let field = &record[c];
            field.parse::<f64>().map_err(|_| {
                Error::Input(format!("row {}: column '{}' has non-numeric value '{field}'", row + 2, &headers[c]))
            })
        };
        y.push(parse(y_col)?);
        for &c in &x_cols {
            xs.push(parse(c)?);
        }
        if let Some(c) = idx_col {
            idx.push(record[c].to_string());
        }
    }
    if y.is_empty() {
        return Err(Error::Input("data file has no rows".into()));
    }
    let x = DMatrix::from_row_slice(y.len(), x_cols.len(), &xs);
    let data = Dataset::with_names(y, x, names, response.to_string())?;
    Ok(LoadedData { data, index: idx_col.map(|_| idx) })
}

pub fn read_dataset_path(path: &Path, response: &str, index: Option<&str>) -> Result<LoadedData> {
    let file = std::fs::File::open(path).map_err(|e| Error::Input(format!("cannot open {}: {e}", path.display())))?;
    read_dataset(std::io::BufReader::new(file), response, index)
}

/// Writes the response first, then the predictors.
pub fn write_dataset<W: Write>(writer: W, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![data.response_name.clone()];
    header.extend(data.predictor_names.iter().cloned());
    w.write_record(&header)?;
    for i in 0..data.n() {
        let mut row = vec![fmt_f64(data.y[i])];
        row.extend((0..data.p()).map(|j| fmt_f64(data.x[(i, j)])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_labels<W: Write>(writer: W, labels: &[bool]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["row", "contaminated"])?;
    for (i, l) in labels.iter().enumerate() {
        w.write_record([i.to_string(), u8::from(*l).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_coefficients<W: Write>(writer: W, names: &[String], beta: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["coordinate", "value"])?;
    for (name, b) in names.iter().zip(beta) {
        w.write_record([name.clone(), fmt_f64(*b)])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per retained iteration.
pub fn write_draws<W: Write>(writer: W, draws: &PosteriorDraws, names: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["iteration".to_string()];
    if draws.include_intercept {
        header.push("mu".into());
    }
    header.extend(names.iter().map(|n| format!("beta_{n}")));
    if draws.gamma.is_some() {
        header.extend(names.iter().map(|n| format!("gamma_{n}")));
    }
    header.push("sigma2".into());
    if draws.loss.uses_alpha() {
        header.push("alpha2".into());
    }
    if draws.q.is_some() {
        header.push("q".into());
    }
    w.write_record(&header)?;
    for k in 0..draws.n_draws {
        let mut row = vec![k.to_string()];
        if draws.include_intercept {
            row.push(fmt_f64(draws.mu[k]));
        }
        row.extend(draws.beta_draw(k).iter().map(|b| fmt_f64(*b)));
        if let Some(g) = &draws.gamma {
            row.extend(g[k * draws.p..(k + 1) * draws.p].iter().map(|v| u8::from(*v).to_string()));
        }
        row.push(fmt_f64(draws.sigma2[k]));
        if draws.loss.uses_alpha() {
            row.push(fmt_f64(draws.alpha2[k]));
        }
        if let Some(q) = &draws.q {
            row.push(fmt_f64(q[k]));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reproducibility stamp carried by every JSON output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunMeta {
    pub seed: u64,
    pub spec_hash: String,
    pub version: &'static str,
}

impl RunMeta {
    /// `spec_text` is any canonical rendering of the run configuration.
    pub fn new(seed: u64, spec_text: &str) -> Self {
        Self { seed, spec_hash: sha256_hex(spec_text.as_bytes()), version: VERSION }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarSummary {
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ScalarSummary {
    pub fn from_draws(xs: &[f64], level: f64) -> Self {
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let tail = (1.0 - level) / 2.0;
        Self {
            mean: mean(xs),
            sd: if xs.len() > 1 { variance(xs).sqrt() } else { 0.0 },
            median: quantile_sorted(&sorted, 0.5),
            lower: quantile_sorted(&sorted, tail),
            upper: quantile_sorted(&sorted, 1.0 - tail),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientSummary {
    pub name: String,
    #[serde(flatten)]
    pub summary: ScalarSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inclusion_probability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    #[serde(flatten)]
    pub meta: RunMeta,
    pub loss: &'static str,
    pub prior: &'static str,
    pub n: usize,
    pub p: usize,
    pub n_draws: usize,
    pub level: f64,
    pub coefficients: Vec<CoefficientSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intercept: Option<ScalarSummary>,
    pub sigma2: ScalarSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha2: Option<ScalarSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<ScalarSummary>,
}

pub fn summarize(draws: &PosteriorDraws, names: &[String], level: f64, meta: RunMeta) -> FitSummary {
    let incl = draws.inclusion_probabilities();
    let coefficients = (0..draws.p)
        .map(|j| CoefficientSummary {
            name: names[j].clone(),
            summary: ScalarSummary::from_draws(&draws.beta_coordinate(j), level),
            inclusion_probability: incl.as_ref().map(|v| v[j]),
        })
        .collect();
    FitSummary {
        meta,
        loss: draws.loss.name(),
        prior: draws.prior,
        n: draws.n,
        p: draws.p,
        n_draws: draws.n_draws,
        level,
        coefficients,
        intercept: draws.include_intercept.then(|| ScalarSummary::from_draws(&draws.mu, level)),
        sigma2: ScalarSummary::from_draws(&draws.sigma2, level),
        alpha2: draws.loss.uses_alpha().then(|| ScalarSummary::from_draws(&draws.alpha2, level)),
        q: draws.q.as_ref().map(|q| ScalarSummary::from_draws(q, level)),
    }
}

/// Pretty JSON followed by a newline.
pub fn write_json<W: Write, T: Serialize>(mut writer: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, value)?;
    writer.write_all(b"\n")?;
    Ok(())
}

/// Long-format metric row: `(setting_id, model, metric, coordinate, value)`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct MetricRow {
    pub setting_id: String,
    pub model: String,
    pub metric: String,
    pub coordinate: String,
    pub value: f64,
}

pub fn write_metric_rows<W: Write>(writer: W, rows: &[MetricRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["setting_id", "model", "metric", "coordinate", "value"])?;
    for r in rows {
        w.write_record([&r.setting_id, &r.model, &r.metric, &r.coordinate, &fmt_f64(r.value)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metric_rows<R: Read>(reader: R) -> Result<Vec<MetricRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}
