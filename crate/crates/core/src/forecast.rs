//! Rolling-window one-step-ahead forecasting.
//!
//! Origin `k` fits on rows `start + k .. start + k + window` and predicts
//! row `start + k + window`; consecutive windows advance by one row.

use serde::Serialize;

use crate::distributions::{stream_key, RngStream};
use crate::error::{Error, Result};
use crate::exec::map_tasks;
use crate::harness::BenchModel;
use crate::io::fmt_f64;
use crate::model::{Dataset, McmcConfig, PosteriorDraws};
use crate::sampler::run_chain;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RollingWindowPlan {
    pub window: usize,
    pub start: usize,
    pub n_origins: usize,
}

impl RollingWindowPlan {
    /// All origins that fit when `n_origins` is `None`.
    pub fn new(n_rows: usize, window: usize, start: usize, n_origins: Option<usize>) -> Result<Self> {
        if window == 0 {
            return Err(Error::Input("forecast window must be positive".into()));
        }
        let available = n_rows.saturating_sub(start + window);
        let n_origins = n_origins.unwrap_or(available);
        if n_origins == 0 || n_origins > available {
            return Err(Error::Input(format!(
                "window of {window} rows from row {start} leaves {available} forecast origins, {n_origins} requested"
            )));
        }
        Ok(Self { window, start, n_origins })
    }

    pub fn window_rows(&self, origin: usize) -> std::ops::Range<usize> {
        let lo = self.start + origin;
        lo..lo + self.window
    }

    pub fn target_row(&self, origin: usize) -> usize {
        self.start + origin + self.window
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitVariant {
    Original,
    Filtered,
}

impl FitVariant {
    pub fn name(self) -> &'static str {
        match self {
            FitVariant::Original => "original",
            FitVariant::Filtered => "filtered",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastRow {
    pub origin: usize,
    pub label: String,
    pub model: String,
    pub variant: FitVariant,
    /// Posterior mean of the regression function at the target row.
    pub forecast: f64,
    pub actual: f64,
    /// Mean over draws of the squared error at the target row.
    pub prediction_mse: f64,
    /// `prediction_mse` over the baseline model's original-fit value at the same origin.
    pub relative_mse: Option<f64>,
    pub n_flagged: Option<usize>,
}

fn score(draws: &PosteriorDraws, target: &Dataset) -> Result<(f64, f64)> {
    let mse = crate::metrics::prediction_mse(draws, target)?[0];
    let beta = draws.beta_mean();
    let mu = if draws.include_intercept { crate::stats::mean(&draws.mu) } else { 0.0 };
    let forecast = mu + (0..draws.p).map(|j| target.x[(0, j)] * beta[j]).sum::<f64>();
    Ok((forecast, mse))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ForecastOptions<'a> {
    /// Also refit each window after dropping flagged observations.
    pub filtered: bool,
    /// Model label whose original-fit error scales every row.
    pub baseline: Option<&'a str>,
    pub threads: usize,
}

/// Runs every (origin, model) fit, optionally with the outlier-filtered
/// refit, and fills `relative_mse` against the baseline when given.
pub fn run_forecast(
    data: &Dataset,
    labels: Option<&[String]>,
    plan: &RollingWindowPlan,
    models: &[BenchModel],
    mcmc: &McmcConfig,
    options: ForecastOptions<'_>,
) -> Result<Vec<ForecastRow>> {
    let ForecastOptions { filtered, baseline, threads } = options;
    if let Some(b) = baseline {
        if !models.iter().any(|m| m.label == b) {
            return Err(Error::Input(format!("baseline model '{b}' is not among the forecast models")));
        }
    }
    if plan.target_row(plan.n_origins - 1) >= data.n() {
        return Err(Error::Input("forecast window exceeds the data range".into()));
    }
    let tasks: Vec<(usize, usize)> = (0..plan.n_origins).flat_map(|o| (0..models.len()).map(move |m| (o, m))).collect();
    let results = map_tasks(&tasks, threads, |&(origin, mi)| -> Result<Vec<ForecastRow>> {
        let model = &models[mi];
        let window: Vec<usize> = plan.window_rows(origin).collect();
        let train = data.select_rows(&window);
        let t = plan.target_row(origin);
        let target = data.select_rows(&[t]);
        let label = labels.map_or_else(|| t.to_string(), |l| l[t].clone());
        let key = |variant: u64| stream_key(&[origin as u64, mi as u64, variant]);

        let draws = run_chain(&train, &model.spec, mcmc, &mut RngStream::new(mcmc.seed, key(0)))?;
        let (forecast, mse) = score(&draws, &target)?;
        let mut rows = vec![ForecastRow {
            origin,
            label: label.clone(),
            model: model.label.clone(),
            variant: FitVariant::Original,
            forecast,
            actual: data.y[t],
            prediction_mse: mse,
            relative_mse: None,
            n_flagged: None,
        }];
        if filtered && model.spec.common().has_lambda() {
            let (report, refit) = crate::diagnostics::filter_and_refit(&train, &model.spec, mcmc, key(1))?;
            let (forecast, mse) = score(&refit, &target)?;
            rows.push(ForecastRow {
                origin,
                label,
                model: model.label.clone(),
                variant: FitVariant::Filtered,
                forecast,
                actual: data.y[t],
                prediction_mse: mse,
                relative_mse: None,
                n_flagged: Some(report.flagged.len()),
            });
        }
        Ok(rows)
    })?;
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    if let Some(b) = baseline {
        let base: Vec<f64> = (0..plan.n_origins)
            .map(|o| {
                rows.iter()
                    .find(|r| r.origin == o && r.model == b && r.variant == FitVariant::Original)
                    .map(|r| r.prediction_mse)
                    .expect("baseline fitted at every origin")
            })
            .collect();
        for r in &mut rows {
            r.relative_mse = Some(r.prediction_mse / base[r.origin]);
        }
    }
    Ok(rows)
}

/// Mean prediction MSE per (model, variant) over origins, scaled by the
/// baseline's original-fit mean when given.
pub fn summarize_forecasts(
    rows: &[ForecastRow],
    baseline: Option<&str>,
) -> Vec<(String, FitVariant, f64, Option<f64>)> {
    let mut keys: Vec<(String, FitVariant)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|(m, v)| *m == r.model && *v == r.variant) {
            keys.push((r.model.clone(), r.variant));
        }
    }
    let mean_of = |m: &str, v: FitVariant| {
        let xs: Vec<f64> = rows.iter().filter(|r| r.model == m && r.variant == v).map(|r| r.prediction_mse).collect();
        crate::stats::mean(&xs)
    };
    let base = baseline.map(|b| mean_of(b, FitVariant::Original));
    keys.into_iter()
        .map(|(m, v)| {
            let mse = mean_of(&m, v);
            (m, v, mse, base.map(|b| mse / b))
        })
        .collect()
}

pub fn write_forecast_rows<W: std::io::Write>(writer: W, rows: &[ForecastRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "origin",
        "label",
        "model",
        "variant",
        "forecast",
        "actual",
        "prediction_mse",
        "relative_mse",
        "n_flagged",
    ])?;
    for r in rows {
        w.write_record([
            r.origin.to_string(),
            r.label.clone(),
            r.model.clone(),
            r.variant.name().to_string(),
            fmt_f64(r.forecast),
            fmt_f64(r.actual),
            fmt_f64(r.prediction_mse),
            r.relative_mse.map(fmt_f64).unwrap_or_default(),
            r.n_flagged.map(|n| n.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_bounds() {
        let plan = RollingWindowPlan::new(10, 6, 0, Some(3)).unwrap();
        assert_eq!(plan.window_rows(0), 0..6);
        assert_eq!(plan.window_rows(2), 2..8);
        assert_eq!(plan.target_row(2), 8);
        assert_eq!(RollingWindowPlan::new(10, 6, 0, None).unwrap().n_origins, 4);
        assert!(RollingWindowPlan::new(10, 6, 0, Some(5)).is_err());
        assert!(RollingWindowPlan::new(5, 6, 0, None).is_err());
    }
}
