use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use sphreg::config::RunConfig;
use sphreg::diagnostics::{filter_and_refit, OutlierReport};
use sphreg::forecast::{run_forecast, summarize_forecasts, write_forecast_rows, ForecastOptions, RollingWindowPlan};
use sphreg::harness::{data_stream, run_bench, BenchModel, BenchPlan, METRICS_FILE, REPLICATES_FILE};
use sphreg::io::{
    read_dataset_path, summarize, write_dataset, write_draws, write_json, write_labels, FitSummary, LoadedData, RunMeta,
};
use sphreg::sampler::fit;
use sphreg::synthetic::generate_dataset_rows;

#[derive(Parser)]
#[command(name = "sphreg", version, about = "Robust Bayesian regression with the scaled pseudo-Huber loss")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set mcmc.n_draws=2000`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Random seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for multi-fit commands (0 uses every core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Directory receiving every output file.
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one model to a CSV file.
    Fit(DataArgs),
    /// Simulate a dataset from the configured design.
    Simulate,
    /// Run the simulation benchmark over settings and models.
    Bench,
    /// Flag outlying observations and refit without them.
    Diagnose(DataArgs),
    /// Rolling-window one-step-ahead forecasts.
    Forecast(DataArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Input CSV; overrides `data.path`.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Response column; overrides `data.response` (default `y`).
    #[arg(long)]
    response: Option<String>,
    /// Column carried as a row label and excluded from the predictors.
    #[arg(long)]
    index: Option<String>,
}

/// A problem with how the program was invoked.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Usage(String);

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let usage = e.downcast_ref::<Usage>().is_some() || e.downcast_ref::<sphreg::Error>().is_some_and(|e| e.is_usage());
    if usage {
        2
    } else {
        1
    }
}

fn run(cli: Cli) -> Result<()> {
    let text = match &cli.config {
        Some(path) => fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(|e| Usage(format!("{e:#}")))?,
        None => String::new(),
    };
    let mut config = RunConfig::from_toml(&text, &cli.overrides)?;
    if let Some(seed) = cli.seed {
        config.seed = Some(seed);
        config.mcmc.seed = seed;
    }
    config.mcmc.validate()?;
    fs::create_dir_all(&cli.output_dir).with_context(|| format!("creating {}", cli.output_dir.display()))?;
    let session = Session {
        meta: RunMeta::new(config.mcmc.seed, &config.canonical()),
        out: cli.output_dir,
        threads: cli.threads,
    };

    match cli.command {
        Command::Fit(args) => cmd_fit(&config, &args, &session),
        Command::Simulate => cmd_simulate(&config, &session),
        Command::Bench => {
            if cli.seed.is_none() {
                return Err(Usage("bench requires --seed".into()).into());
            }
            cmd_bench(&config, &session)
        }
        Command::Diagnose(args) => cmd_diagnose(&config, &args, &session),
        Command::Forecast(args) => cmd_forecast(&config, &args, &session),
    }
}

struct Session {
    meta: RunMeta,
    out: PathBuf,
    threads: usize,
}

impl Session {
    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        let path = self.out.join(name);
        log::info!("writing {}", path.display());
        Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
    }
}

fn load(config: &RunConfig, args: &DataArgs) -> Result<LoadedData> {
    let path: &Path = args
        .data
        .as_deref()
        .or(config.data.path.as_deref())
        .ok_or_else(|| Usage("no input data: pass --data or set data.path".into()))?;
    let response = args.response.as_deref().or(config.data.response.as_deref()).unwrap_or("y");
    let index = args.index.as_deref().or(config.data.index.as_deref());
    read_dataset_path(path, response, index).with_context(|| format!("reading {}", path.display()))
}

fn cmd_fit(config: &RunConfig, args: &DataArgs, session: &Session) -> Result<()> {
    let loaded = load(config, args)?;
    let spec = config.model.to_spec()?;
    let draws = fit(&loaded.data, &spec, &config.mcmc, 0)?;
    let names = &loaded.data.predictor_names;
    write_json(session.create("summary.json")?, &summarize(&draws, names, config.output.level, session.meta.clone()))?;
    if config.output.write_draws {
        write_draws(session.create("draws.csv")?, &draws, names)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulationRecord<'a> {
    #[serde(flatten)]
    meta: &'a RunMeta,
    setting: &'a sphreg::synthetic::SimSetting,
    beta_true: &'a [f64],
    n_contaminated: usize,
}

fn cmd_simulate(config: &RunConfig, session: &Session) -> Result<()> {
    let setting = &config.setting;
    setting.validate()?;
    // Same stream as the benchmark's first training set for this setting.
    let mut rng = data_stream(config.mcmc.seed, setting, 0);
    let sim = generate_dataset_rows(setting, setting.n, &mut rng)?;
    write_dataset(session.create("data.csv")?, &sim.data)?;
    write_labels(session.create("labels.csv")?, &sim.contaminated)?;
    let record = SimulationRecord {
        meta: &session.meta,
        setting,
        beta_true: &sim.beta_true,
        n_contaminated: sim.contaminated.iter().filter(|c| **c).count(),
    };
    write_json(session.create("simulation.json")?, &record)?;
    Ok(())
}

fn bench_models(config: &RunConfig) -> Result<Vec<BenchModel>> {
    config.model_list().iter().map(|m| Ok(BenchModel { label: m.label(), spec: m.to_spec()? })).collect()
}

#[derive(Serialize)]
struct BenchRecord<'a> {
    #[serde(flatten)]
    meta: &'a RunMeta,
    settings: Vec<&'a str>,
    models: Vec<&'a str>,
    replicate_rows: usize,
    metric_rows: usize,
}

fn cmd_bench(config: &RunConfig, session: &Session) -> Result<()> {
    let settings = if config.settings.is_empty() { vec![config.setting.clone()] } else { config.settings.clone() };
    let plan = BenchPlan {
        settings,
        models: bench_models(config)?,
        mcmc: config.mcmc.clone(),
        seed: config.mcmc.seed,
        replicates: config.bench.replicates,
        level: config.bench.level,
        threads: session.threads,
    };
    let out = run_bench(&plan, Some(&session.out))?;
    log::info!(
        "wrote {} and {}",
        session.out.join(REPLICATES_FILE).display(),
        session.out.join(METRICS_FILE).display()
    );
    let failed = out.metric_rows.iter().filter(|r| r.metric == "replicates_failed").map(|r| r.value).sum::<f64>();
    if failed > 0.0 {
        log::warn!("{failed} replicate fits failed; see status rows in {REPLICATES_FILE}");
    }
    let record = BenchRecord {
        meta: &session.meta,
        settings: plan.settings.iter().map(|s| s.id.as_str()).collect(),
        models: plan.models.iter().map(|m| m.label.as_str()).collect(),
        replicate_rows: out.replicate_rows.len(),
        metric_rows: out.metric_rows.len(),
    };
    write_json(session.create("bench.json")?, &record)?;
    Ok(())
}

#[derive(Serialize)]
struct DiagnoseRecord<'a> {
    #[serde(flatten)]
    meta: &'a RunMeta,
    report: OutlierReport,
    /// Row labels of the flagged observations.
    flagged_labels: Vec<String>,
    refit: FitSummary,
}

fn cmd_diagnose(config: &RunConfig, args: &DataArgs, session: &Session) -> Result<()> {
    let loaded = load(config, args)?;
    let spec = config.model.to_spec()?;
    let (report, refit) = filter_and_refit(&loaded.data, &spec, &config.mcmc, 0)?;
    let flagged_labels =
        report.flagged.iter().map(|&i| loaded.index.as_ref().map_or_else(|| i.to_string(), |l| l[i].clone())).collect();
    let names = &loaded.data.predictor_names;
    let refit_summary = summarize(&refit, names, config.output.level, session.meta.clone());
    if config.output.write_draws {
        write_draws(session.create("refit_draws.csv")?, &refit, names)?;
    }
    write_json(
        session.create("diagnose.json")?,
        &DiagnoseRecord { meta: &session.meta, report, flagged_labels, refit: refit_summary },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct ForecastSummaryRow {
    model: String,
    variant: &'static str,
    mean_prediction_mse: f64,
    relative_mse: Option<f64>,
}

#[derive(Serialize)]
struct ForecastRecord<'a> {
    #[serde(flatten)]
    meta: &'a RunMeta,
    window: usize,
    n_origins: usize,
    baseline: Option<&'a str>,
    summary: Vec<ForecastSummaryRow>,
}

fn cmd_forecast(config: &RunConfig, args: &DataArgs, session: &Session) -> Result<()> {
    let loaded = load(config, args)?;
    let fc = &config.forecast;
    let plan = RollingWindowPlan::new(loaded.data.n(), fc.window, fc.start, fc.n_origins)?;
    let models = bench_models(config)?;
    let baseline = fc.baseline.as_deref();
    let options = ForecastOptions { filtered: fc.filtered, baseline, threads: session.threads };
    let rows = run_forecast(&loaded.data, loaded.index.as_deref(), &plan, &models, &config.mcmc, options)?;
    write_forecast_rows(session.create("forecast.csv")?, &rows)?;
    let summary = summarize_forecasts(&rows, baseline)
        .into_iter()
        .map(|(model, variant, mse, rel)| ForecastSummaryRow {
            model,
            variant: variant.name(),
            mean_prediction_mse: mse,
            relative_mse: rel,
        })
        .collect();
    let record =
        ForecastRecord { meta: &session.meta, window: plan.window, n_origins: plan.n_origins, baseline, summary };
    write_json(session.create("forecast_summary.json")?, &record)?;
    Ok(())
}
