//! The `bench` command: cold/warm latency plus holdout accuracy per model.
//!
//! Protocol: each series is split into a training part and a holdout of the
//! last H observations, with all data preparation done before any clock
//! starts. The timed runnable is the full fit-plus-predict over the training
//! series, executed serially on one worker; the first invocation carries any
//! one-time process setup and lands in the cold measurement. Accuracy
//! metrics are computed once, untimed, from the same deterministic forecasts
//! and averaged uniformly across series.
//!
//! By default the command acts as an orchestrator that runs every model in
//! its own freshly spawned worker process, so no model's measurements see an
//! execution environment warmed by another model. `--in-process` runs the
//! models sequentially in the calling process instead (the worker mode).

use crate::error::{CliError, Result};
use crate::ingest::Dataset;
use foldcast_core::metrics;
use foldcast_core::models::{self, Model};
use foldcast_core::series::{ForecastRequest, TimeSeries};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Holdout length used by the benchmark protocol unless overridden.
pub const DEFAULT_HOLDOUT: usize = 24;
/// Warm iterations measured after the cold invocation.
pub const DEFAULT_WARM_ITERS: usize = 5;

/// Report schema version.
pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchConfig {
    pub holdout: usize,
    pub warm_iters: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            holdout: DEFAULT_HOLDOUT,
            warm_iters: DEFAULT_WARM_ITERS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRow {
    pub model: String,
    pub t_cold: Option<f64>,
    pub t_warm: Option<f64>,
    pub mape: Option<f64>,
    pub mae: Option<f64>,
    pub rmse: Option<f64>,
    pub mase: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema: u32,
    pub dataset: String,
    pub holdout: usize,
    pub warm_iters: usize,
    pub seed: u64,
    /// Multi-series inputs are scored as the uniform mean of per-series
    /// metrics.
    pub aggregation: String,
    pub rows: Vec<BenchRow>,
}

/// Runs the benchmark for every model. Model failures are recorded in their
/// row and do not abort the run.
pub fn run_bench(dataset: &Dataset, model_list: &[Model], config: &BenchConfig) -> Result<BenchReport> {
    if config.holdout == 0 {
        return Err(CliError::Usage("holdout must be at least 1".into()));
    }
    if config.warm_iters == 0 {
        return Err(CliError::Usage("warm iterations must be at least 1".into()));
    }
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

    // All data preparation happens here, before any timing loop.
    let mut trains = Vec::with_capacity(dataset.series.len());
    let mut holdouts: Vec<Vec<f64>> = Vec::with_capacity(dataset.series.len());
    for s in &dataset.series {
        let cut = s.len() - config.holdout;
        trains.push(
            TimeSeries::new(s.id.clone(), s.values[..cut].to_vec())
                .map_err(|e| CliError::Data(e.to_string()))?,
        );
        holdouts.push(s.values[cut..].to_vec());
    }
    let request = ForecastRequest::new(config.holdout).map_err(|e| CliError::Usage(e.to_string()))?;

    let rows = model_list
        .iter()
        .map(|model| bench_one_model(model, &trains, &holdouts, &request, config))
        .collect();

    Ok(BenchReport {
        schema: REPORT_SCHEMA,
        dataset: dataset.source.clone(),
        holdout: config.holdout,
        warm_iters: config.warm_iters,
        seed: config.seed,
        aggregation: "uniform mean of per-series metrics".into(),
        rows,
    })
}

fn bench_one_model(
    model: &Model,
    trains: &[TimeSeries],
    holdouts: &[Vec<f64>],
    request: &ForecastRequest,
    config: &BenchConfig,
) -> BenchRow {
    let name = model.spec.name().to_string();

    // Timing runs are serialized on the calling thread: every invocation is
    // the full fit-plus-predict over all training series, executed
    // sequentially so no scheduler noise leaks into the measurements. The
    // first invocation carries the process's one-time costs (allocator,
    // caches, lazily loaded code paths) and lands in T_cold.
    let mut last: Option<foldcast_core::Result<Vec<Vec<f64>>>> = None;
    let timing = metrics::time_cold_warm(
        || {
            let result: foldcast_core::Result<Vec<Vec<f64>>> = trains
                .iter()
                .map(|s| models::forecast(model, s, request).map(|r| r.mean))
                .collect();
            last = Some(result);
        },
        config.warm_iters,
    )
    .expect("warm_iters validated nonzero");

    let means = match last.expect("runnable executed") {
        Ok(m) => m,
        Err(e) => {
            return BenchRow {
                model: name,
                t_cold: None,
                t_warm: None,
                mape: None,
                mae: None,
                rmse: None,
                mase: None,
                error: Some(e.to_string()),
            }
        }
    };

    let report = match metrics::point_metrics(holdouts, &means) {
        Ok(r) => r,
        Err(e) => {
            return BenchRow {
                model: name,
                t_cold: Some(timing.cold),
                t_warm: Some(timing.warm),
                mape: None,
                mae: None,
                rmse: None,
                mase: None,
                error: Some(e.to_string()),
            }
        }
    };

    BenchRow {
        model: name,
        t_cold: Some(timing.cold),
        t_warm: Some(timing.warm),
        mape: report.get("mape"),
        mae: report.get("mae"),
        rmse: report.get("rmse"),
        mase: report.get("mase"),
        error: None,
    }
}

/// Orchestrates one isolated worker process per model and merges their rows
/// into a single report. The worker is this same binary invoked with
/// `--in-process` and a single model name; a worker that exits nonzero is
/// recorded as a failed row rather than aborting the run.
pub fn run_bench_isolated(
    exe: &Path,
    input: &Path,
    model_names: &[String],
    season_length: usize,
    window: usize,
    config: &BenchConfig,
    scratch: &Path,
) -> Result<BenchReport> {
    let mut rows = Vec::with_capacity(model_names.len());
    for name in model_names {
        let worker_dir = scratch.join(format!(".worker-{name}"));
        std::fs::create_dir_all(&worker_dir)?;
        let output = std::process::Command::new(exe)
            .arg("bench")
            .arg("--in-process")
            .arg("--models")
            .arg(name)
            .arg("--input")
            .arg(input)
            .arg("--h")
            .arg(config.holdout.to_string())
            .arg("--warm-iters")
            .arg(config.warm_iters.to_string())
            .arg("--seed")
            .arg(config.seed.to_string())
            .arg("--season-length")
            .arg(season_length.to_string())
            .arg("--window")
            .arg(window.to_string())
            .arg("--output")
            .arg(&worker_dir)
            .output()?;
        if output.status.success() {
            let text = std::fs::read_to_string(worker_dir.join("report.json"))?;
            let report: BenchReport = serde_json::from_str(&text)
                .map_err(|e| CliError::Data(format!("worker report for {name}: {e}")))?;
            rows.extend(report.rows);
        } else {
            rows.push(BenchRow {
                model: name.clone(),
                t_cold: None,
                t_warm: None,
                mape: None,
                mae: None,
                rmse: None,
                mase: None,
                error: Some(format!(
                    "worker exited with {}: {}",
                    output.status,
                    String::from_utf8_lossy(&output.stderr).trim()
                )),
            });
        }
        let _ = std::fs::remove_dir_all(&worker_dir);
    }
    Ok(BenchReport {
        schema: REPORT_SCHEMA,
        dataset: input.display().to_string(),
        holdout: config.holdout,
        warm_iters: config.warm_iters,
        seed: config.seed,
        aggregation: "uniform mean of per-series metrics".into(),
        rows,
    })
}

/// Persists the report as `report.json` and `report.csv` in `dir`.
pub fn write_report(report: &BenchReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::Data(format!("serialize report: {e}")))?;
    std::fs::write(dir.join("report.json"), json)?;

    let mut csv_out = Vec::new();
    writeln!(csv_out, "model,t_cold,t_warm,mape,mae,rmse,mase,error")?;
    for row in &report.rows {
        let cell = |v: &Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        writeln!(
            csv_out,
            "{},{},{},{},{},{},{},{}",
            row.model,
            cell(&row.t_cold),
            cell(&row.t_warm),
            cell(&row.mape),
            cell(&row.mae),
            cell(&row.rmse),
            cell(&row.mase),
            row.error.clone().unwrap_or_default()
        )?;
    }
    std::fs::write(dir.join("report.csv"), csv_out)?;
    Ok(())
}
