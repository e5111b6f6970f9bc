//! `foldcast`: forecast CSV time series, dump conformal calibration scores,
//! and benchmark cold/warm latency with accuracy metrics.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 model error.

use clap::{Args, Parser, Subcommand};
use foldcast_cli::bench::{self, BenchConfig};
use foldcast_cli::conformal_cv;
use foldcast_cli::error::{CliError, Result};
use foldcast_cli::forecast::run_forecast;
use foldcast_cli::ingest::{self, write_dataset_csv};
use foldcast_cli::modelspec::{parse_model, parse_model_list, ModelOptions};
use foldcast_cli::synth::{self, SynthKind};
use foldcast_core::conformal::{ConformalConfig, ConformalMethod};
use foldcast_core::models::Model;
use foldcast_core::series::ForecastRequest;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(name = "foldcast", version, about = "Fold-based time-series forecasting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forecast each series in a CSV, emitting one JSON object per series.
    Forecast(ForecastArgs),
    /// Benchmark models: cold/warm latency plus holdout accuracy.
    Bench(BenchArgs),
    /// Dump walk-forward conformity score matrices as CSV.
    ConformalCv(ConformalCvArgs),
    /// Generate a deterministic synthetic dataset as CSV.
    Synth(SynthArgs),
}

#[derive(Args)]
struct ForecastArgs {
    /// Model name, e.g. naive, holtwinters, theta, garch.
    #[arg(long)]
    model: String,
    /// Input CSV with header unique_id,ds,y[,x1,...] (unique_id optional).
    #[arg(long)]
    input: PathBuf,
    /// Forecast horizon.
    #[arg(long)]
    h: usize,
    /// Season length for seasonal models.
    #[arg(long, default_value_t = 1)]
    season_length: usize,
    /// Window size for window-average models.
    #[arg(long, default_value_t = 3)]
    window: usize,
    /// Comma-separated coverage levels in (0, 100), e.g. 80,95.
    #[arg(long)]
    level: Option<String>,
    /// Number of conformal calibration windows (enables conformal intervals).
    #[arg(long)]
    conformal_windows: Option<usize>,
    /// Conformal method: symmetric or signed.
    #[arg(long, default_value = "symmetric")]
    conformal_method: String,
    /// Write JSON lines here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma list of model names, or "all".
    #[arg(long)]
    models: String,
    #[arg(long)]
    input: PathBuf,
    /// Holdout length.
    #[arg(long, default_value_t = bench::DEFAULT_HOLDOUT)]
    h: usize,
    /// Warm iterations after the cold invocation.
    #[arg(long, default_value_t = bench::DEFAULT_WARM_ITERS)]
    warm_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    season_length: usize,
    #[arg(long, default_value_t = 3)]
    window: usize,
    /// Run all models inside this process instead of spawning one isolated
    /// worker process per model.
    #[arg(long)]
    in_process: bool,
    /// Directory for report.json and report.csv.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct ConformalCvArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    input: PathBuf,
    /// Number of calibration windows K.
    #[arg(long)]
    windows: usize,
    /// Calibration horizon h.
    #[arg(long)]
    h: usize,
    #[arg(long, default_value_t = 1)]
    season_length: usize,
    #[arg(long, default_value_t = 3)]
    window: usize,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// seasonal-trend, random-walk, or intermittent.
    #[arg(long, default_value = "seasonal-trend")]
    kind: String,
    #[arg(long)]
    length: usize,
    #[arg(long, default_value_t = 1)]
    series: usize,
    #[arg(long, default_value_t = 24)]
    season_length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Forecast(args) => cmd_forecast(args),
        Command::Bench(args) => cmd_bench(args),
        Command::ConformalCv(args) => cmd_conformal_cv(args),
        Command::Synth(args) => cmd_synth(args),
    }
}

fn parse_levels(arg: &Option<String>) -> Result<Vec<f64>> {
    let Some(arg) = arg else {
        return Ok(Vec::new());
    };
    arg.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("non-numeric level '{s}'")))
        })
        .collect()
}

fn write_lines(lines: &[String], output: &Option<PathBuf>) -> Result<()> {
    match output {
        Some(path) => {
            let mut f = std::fs::File::create(path)?;
            for line in lines {
                writeln!(f, "{line}")?;
            }
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            for line in lines {
                writeln!(lock, "{line}")?;
            }
        }
    }
    Ok(())
}

fn cmd_forecast(args: ForecastArgs) -> Result<()> {
    let opts = ModelOptions {
        season_length: args.season_length,
        window: args.window,
    };
    let spec = parse_model(&args.model, &opts)?;
    let mut model = Model::new(spec);

    let levels = parse_levels(&args.level)?;
    if let Some(windows) = args.conformal_windows {
        let method = ConformalMethod::from_str(&args.conformal_method)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let config = ConformalConfig::new(windows, args.h, method)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        model = model.with_conformal(config);
    } else if !levels.is_empty() {
        return Err(CliError::Usage(
            "interval levels need --conformal-windows".into(),
        ));
    }

    let mut request =
        ForecastRequest::new(args.h).map_err(|e| CliError::Usage(e.to_string()))?;
    if !levels.is_empty() {
        request = request
            .with_levels(levels)
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }

    let dataset = ingest::ingest_csv(&args.input)?;
    let lines = run_forecast(&dataset, &model, &request)?;
    write_lines(&lines, &args.output)
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let opts = ModelOptions {
        season_length: args.season_length,
        window: args.window,
    };
    let specs = parse_model_list(&args.models, &opts)?;
    let config = BenchConfig {
        holdout: args.h,
        warm_iters: args.warm_iters,
        seed: args.seed,
    };

    let report = if args.in_process {
        let models: Vec<Model> = specs.into_iter().map(Model::new).collect();
        let dataset = ingest::ingest_csv(&args.input)?;
        bench::run_bench(&dataset, &models, &config)?
    } else {
        // Validate the input once up front, then orchestrate one isolated
        // worker process per model.
        let dataset = ingest::ingest_csv(&args.input)?;
        for s in &dataset.series {
            if s.len() <= config.holdout {
                return Err(CliError::Data(format!(
                    "series '{}' has {} observations, not more than the holdout {}",
                    s.id,
                    s.len(),
                    config.holdout
                )));
            }
        }
        drop(dataset);
        let names: Vec<String> = specs.iter().map(|s| s.name().to_string()).collect();
        let exe = std::env::current_exe()?;
        bench::run_bench_isolated(
            &exe,
            &args.input,
            &names,
            args.season_length,
            args.window,
            &config,
            &args.output,
        )?
    };

    bench::write_report(&report, &args.output)?;
    println!(
        "wrote {} model rows to {}",
        report.rows.len(),
        args.output.display()
    );
    Ok(())
}

fn cmd_conformal_cv(args: ConformalCvArgs) -> Result<()> {
    let opts = ModelOptions {
        season_length: args.season_length,
        window: args.window,
    };
    let spec = parse_model(&args.model, &opts)?;
    let config = ConformalConfig::new(args.windows, args.h, ConformalMethod::Symmetric)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let dataset = ingest::ingest_csv(&args.input)?;
    let scores = conformal_cv::run_conformal_cv(&dataset, &Model::new(spec), &config)?;

    let mut out = Vec::new();
    conformal_cv::write_scores_csv(&scores, args.h, &mut out)?;
    match &args.output {
        Some(path) => std::fs::write(path, out)?,
        None => std::io::stdout().write_all(&out)?,
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let kind = SynthKind::from_str(&args.kind)?;
    let dataset = synth::generate(kind, args.length, args.series, args.season_length, args.seed)?;
    let mut out = Vec::new();
    write_dataset_csv(&dataset, &mut out)?;
    match &args.output {
        Some(path) => std::fs::write(path, out)?,
        None => std::io::stdout().write_all(&out)?,
    }
    Ok(())
}
