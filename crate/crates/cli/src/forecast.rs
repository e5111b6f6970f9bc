//! The `forecast` command: per-series forecasts serialized as JSON lines.

use crate::error::{CliError, Result};
use crate::ingest::Dataset;
use foldcast_core::fold;
use foldcast_core::models::{self, Model};
use foldcast_core::series::{ForecastRequest, ForecastResult, TimeSeries};
use serde_json::{json, Map, Value};

/// Forecasts every series in the dataset (batched across a worker pool) and
/// renders one JSON object per series, in input order. Deterministic across
/// runs and worker counts.
pub fn run_forecast(
    dataset: &Dataset,
    model: &Model,
    request: &ForecastRequest,
) -> Result<Vec<String>> {
    let results = forecast_batch(&dataset.series, model, request)?;
    Ok(dataset
        .series
        .iter()
        .zip(&results)
        .map(|(series, result)| render_series_json(&series.id, result))
        .collect())
}

/// Batched fit-plus-predict over a slice of series.
pub fn forecast_batch(
    series: &[TimeSeries],
    model: &Model,
    request: &ForecastRequest,
) -> Result<Vec<ForecastResult>> {
    fold::try_batch_map(|s: &TimeSeries| models::forecast(model, s, request), series).map_err(
        |e| match e {
            foldcast_core::Error::BatchElement { index, source } => CliError::Model(format!(
                "series '{}': {source}",
                series.get(index).map(|s| s.id.as_str()).unwrap_or("?")
            )),
            other => CliError::Model(other.to_string()),
        },
    )
}

/// One series as a JSON object: `unique_id`, `mean`, then each interval band
/// in level order, then any warnings.
pub fn render_series_json(id: &str, result: &ForecastResult) -> String {
    let mut obj = Map::new();
    obj.insert("unique_id".into(), json!(id));
    obj.insert("mean".into(), json!(result.mean));
    let mut keys: Vec<&String> = result.intervals.keys().collect();
    keys.sort_by(|a, b| {
        let level = |k: &str| -> f64 {
            k.split_once('-')
                .and_then(|(_, s)| s.parse().ok())
                .unwrap_or(0.0)
        };
        level(a)
            .partial_cmp(&level(b))
            .unwrap()
            .then_with(|| b.cmp(a)) // lo before hi at the same level
    });
    for key in keys {
        obj.insert(key.clone(), json!(result.intervals[key]));
    }
    if !result.warnings.is_empty() {
        obj.insert("warnings".into(), json!(result.warnings));
    }
    Value::Object(obj).to_string()
}
