use nalgebra::DMatrix;
use sphreg::config::{ModelConfig, PriorKind};
use sphreg::distributions::{standard_normal, RngStream};
use sphreg::forecast::{run_forecast, summarize_forecasts, FitVariant, ForecastOptions, RollingWindowPlan};
use sphreg::harness::{run_bench, BenchModel, BenchPlan, METRICS_FILE, REPLICATES_FILE};
use sphreg::model::{Dataset, McmcConfig};
use sphreg::synthetic::{ErrorDist, SimSetting};
use sphreg::LossKind;

fn model(loss: LossKind, prior: PriorKind) -> BenchModel {
    let c = ModelConfig::new(loss, prior);
    BenchModel { label: c.label(), spec: c.to_spec().unwrap() }
}

fn plan(replicates: usize, threads: usize) -> BenchPlan {
    BenchPlan {
        settings: vec![
            SimSetting { id: "a".into(), n: 40, p: 3, n_test: 20, ..Default::default() },
            SimSetting {
                id: "b".into(),
                n: 30,
                p: 20,
                n_test: 10,
                error: ErrorDist::StudentT { df: 4.0 },
                beta_pattern: sphreg::synthetic::BetaPattern::Sparse,
                ..Default::default()
            },
        ],
        models: vec![
            model(LossKind::Sph, PriorKind::Ridge),
            model(LossKind::L1, PriorKind::Ridge),
            model(LossKind::Sph, PriorKind::SpikeSlab),
        ],
        mcmc: McmcConfig { n_burnin: 50, n_draws: 100, ..Default::default() },
        seed: 21,
        replicates: Some(replicates),
        level: 0.9,
        threads,
    }
}

#[test]
fn one_replicate_gives_one_row_per_model_and_metric() {
    let mut p = plan(1, 1);
    p.settings.truncate(1);
    let out = run_bench(&p, None).unwrap();
    let rows: Vec<_> = out.metric_rows.iter().filter(|r| r.metric == "median_prediction_mse").collect();
    assert_eq!(rows.len(), 3);
    let models: Vec<&str> = rows.iter().map(|r| r.model.as_str()).collect();
    assert_eq!(models, ["sph_ridge", "l1_ridge", "sph_ss"]);
    assert!(out.metric_rows.iter().any(|r| r.metric == "median_mcc" && r.model == "sph_ss"));
    assert!(!out.metric_rows.iter().any(|r| r.metric == "median_mcc" && r.model == "sph_ridge"));
}

#[test]
fn schedule_does_not_change_results() {
    let seq = run_bench(&plan(2, 1), None).unwrap();
    let par = run_bench(&plan(2, 4), None).unwrap();
    assert_eq!(seq, par);
}

#[test]
fn resumed_run_matches_uninterrupted_run() {
    let full_dir = tempfile::tempdir().unwrap();
    run_bench(&plan(3, 2), Some(full_dir.path())).unwrap();

    let resumed_dir = tempfile::tempdir().unwrap();
    run_bench(&plan(1, 2), Some(resumed_dir.path())).unwrap();
    // Simulate a crash mid-task: a dangling row without its status line.
    {
        use std::io::Write;
        let mut f = std::fs::OpenOptions::new().append(true).open(resumed_dir.path().join(REPLICATES_FILE)).unwrap();
        writeln!(f, "a,2,sph_ridge,posterior_mse,x1,9.9e9").unwrap();
    }
    run_bench(&plan(3, 2), Some(resumed_dir.path())).unwrap();

    for file in [REPLICATES_FILE, METRICS_FILE] {
        let a = std::fs::read(full_dir.path().join(file)).unwrap();
        let b = std::fs::read(resumed_dir.path().join(file)).unwrap();
        assert!(a == b, "{file} differs after resume");
    }
}

fn series(n: usize, noise: f64, seed: u64) -> Dataset {
    let mut rng = RngStream::new(seed, 0);
    let x = DMatrix::from_fn(n, 2, |_, _| standard_normal(&mut rng));
    let y = (0..n).map(|i| 1.0 + 2.0 * x[(i, 0)] - x[(i, 1)] + noise * standard_normal(&mut rng)).collect();
    Dataset::new(y, x).unwrap()
}

#[test]
fn rolling_window_origins() {
    let data = series(10, 0.5, 22);
    let plan = RollingWindowPlan::new(10, 6, 0, Some(3)).unwrap();
    let models = [model(LossKind::Sph, PriorKind::Ridge), model(LossKind::L2, PriorKind::Ridge)];
    let mcmc = McmcConfig { n_burnin: 50, n_draws: 100, ..Default::default() };
    let rows =
        run_forecast(&data, None, &plan, &models[..1], &mcmc, ForecastOptions { threads: 1, ..Default::default() })
            .unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows.iter().map(|r| r.label.as_str()).collect::<Vec<_>>(), ["6", "7", "8"]);

    let rows = run_forecast(
        &data,
        None,
        &plan,
        &models,
        &mcmc,
        ForecastOptions { baseline: Some("l2_ridge"), threads: 2, ..Default::default() },
    )
    .unwrap();
    for r in rows.iter().filter(|r| r.model == "l2_ridge") {
        assert_eq!(r.relative_mse, Some(1.0));
    }
    let summary = summarize_forecasts(&rows, Some("l2_ridge"));
    let base = summary.iter().find(|s| s.0 == "l2_ridge").unwrap();
    assert_eq!(base.3, Some(1.0));
}

#[test]
fn noiseless_data_forecast_exactly() {
    let data = series(40, 0.0, 23);
    let plan = RollingWindowPlan::new(40, 30, 0, Some(5)).unwrap();
    // Gaussian working model. The coefficient prior is scaled by sigma^2 and
    // its quadratic form enters the variance update, so it must be vague too.
    let mut c = ModelConfig::new(LossKind::L2, PriorKind::Ridge);
    c.a_sigma = 1.0;
    c.b_sigma = 1e-10;
    c.ridge_precision = 1e-8;
    c.tau_mu2 = 1e8;
    let models = [BenchModel { label: "l2".into(), spec: c.to_spec().unwrap() }];
    let mcmc = McmcConfig { n_burnin: 200, n_draws: 500, ..Default::default() };
    let rows =
        run_forecast(&data, None, &plan, &models, &mcmc, ForecastOptions { threads: 1, ..Default::default() }).unwrap();
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert!(r.prediction_mse < 1e-4, "origin {}: {}", r.origin, r.prediction_mse);
    }
}

#[test]
fn filtered_refit_rows_and_range_checks() {
    let mut data = series(30, 0.3, 24);
    data.y[10] += 50.0;
    let plan = RollingWindowPlan::new(30, 25, 0, Some(2)).unwrap();
    let models = [model(LossKind::Sph, PriorKind::Ridge), model(LossKind::L2, PriorKind::Ridge)];
    let mcmc = McmcConfig { n_burnin: 100, n_draws: 200, ..Default::default() };
    let rows = run_forecast(
        &data,
        None,
        &plan,
        &models,
        &mcmc,
        ForecastOptions { filtered: true, threads: 1, ..Default::default() },
    )
    .unwrap();
    // L2 has no filtered variant.
    assert_eq!(rows.len(), 2 * 3);
    let flagged: Vec<usize> =
        rows.iter().filter(|r| r.variant == FitVariant::Filtered).map(|r| r.n_flagged.unwrap()).collect();
    assert!(flagged.iter().all(|f| *f >= 1), "{flagged:?}");

    assert!(RollingWindowPlan::new(30, 25, 0, Some(6)).is_err());
    assert!(run_forecast(
        &data,
        None,
        &plan,
        &models,
        &mcmc,
        ForecastOptions { baseline: Some("nope"), threads: 1, ..Default::default() }
    )
    .is_err());
}
