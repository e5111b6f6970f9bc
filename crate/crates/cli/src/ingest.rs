//! Long-format CSV ingestion.
//!
//! Expected header: `unique_id,ds,y[,x1,x2,...]` with `unique_id` optional
//! (a single series defaults to id "y0"). Timestamps are opaque ordering
//! tokens: they must be strictly increasing within each series but are never
//! parsed as calendar dates. Every column beyond the three named ones must be
//! numeric and becomes an exogenous regressor in file order.

use crate::error::{CliError, Result};
use foldcast_core::series::TimeSeries;
use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

/// A parsed input file: one or more series, identifiers unique, file order
/// preserved.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub series: Vec<TimeSeries>,
    pub source: String,
    /// Free-text cadence label, e.g. "monthly". Timestamps stay opaque
    /// either way; seasonality always comes from explicit season lengths.
    pub frequency: Option<String>,
    pub exog_names: Vec<String>,
    /// Timestamp tokens per series, parallel to `series`.
    pub timestamps: Vec<Vec<String>>,
}

struct SeriesBuilder {
    values: Vec<f64>,
    exog: Vec<Vec<f64>>,
    timestamps: Vec<String>,
}

pub fn ingest_csv(path: &Path) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;

    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("cannot read header: {e}")))?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let id_col = find("unique_id");
    let ds_col = find("ds").ok_or_else(|| CliError::Data("missing ds column".into()))?;
    let y_col = find("y").ok_or_else(|| CliError::Data("missing y column".into()))?;
    let exog_cols: Vec<usize> = (0..headers.len())
        .filter(|&i| Some(i) != id_col && i != ds_col && i != y_col)
        .collect();
    let exog_names: Vec<String> = exog_cols.iter().map(|&i| headers[i].to_string()).collect();

    let mut order: Vec<String> = Vec::new();
    let mut building: HashMap<String, SeriesBuilder> = HashMap::new();

    for record in reader.records() {
        let record = record.map_err(|e| CliError::Data(format!("malformed row: {e}")))?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or_default();
        let id = match id_col {
            Some(c) => record.get(c).unwrap_or_default().to_string(),
            None => "y0".to_string(),
        };
        let ds = record.get(ds_col).unwrap_or_default().to_string();
        let y_raw = record.get(y_col).unwrap_or_default();
        let y: f64 = y_raw
            .trim()
            .parse()
            .map_err(|_| CliError::Data(format!("line {line}: non-numeric y value '{y_raw}'")))?;
        if !y.is_finite() {
            return Err(CliError::Data(format!(
                "line {line}: non-finite y value '{y_raw}'"
            )));
        }
        let mut exog_row = Vec::with_capacity(exog_cols.len());
        for &c in &exog_cols {
            let raw = record.get(c).unwrap_or_default();
            let v: f64 = raw.trim().parse().map_err(|_| {
                CliError::Data(format!(
                    "line {line}: non-numeric value '{raw}' in column {}",
                    &headers[c]
                ))
            })?;
            exog_row.push(v);
        }

        let builder = building.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            SeriesBuilder {
                values: Vec::new(),
                exog: Vec::new(),
                timestamps: Vec::new(),
            }
        });
        if let Some(last) = builder.timestamps.last() {
            if *last == ds {
                return Err(CliError::Data(format!(
                    "line {line}: duplicate timestamp '{ds}' for series '{id}'"
                )));
            }
            if *last > ds {
                return Err(CliError::Data(format!(
                    "line {line}: out-of-order timestamp '{ds}' for series '{id}'"
                )));
            }
        }
        builder.values.push(y);
        builder.timestamps.push(ds);
        if !exog_cols.is_empty() {
            builder.exog.push(exog_row);
        }
    }

    if order.is_empty() {
        return Err(CliError::Data("no data rows".into()));
    }

    let mut series = Vec::with_capacity(order.len());
    let mut timestamps = Vec::with_capacity(order.len());
    for id in order {
        let b = building.remove(&id).expect("builder exists for ordered id");
        let ts = if b.exog.is_empty() {
            TimeSeries::new(id, b.values)
        } else {
            TimeSeries::with_exog(id, b.values, b.exog)
        }
        .map_err(|e| CliError::Data(e.to_string()))?;
        series.push(ts);
        timestamps.push(b.timestamps);
    }

    Ok(Dataset {
        series,
        source: path.display().to_string(),
        frequency: None,
        exog_names,
        timestamps,
    })
}

/// Writes a dataset back in the ingestion format. Values print in shortest
/// round-trip form, so ingest -> write -> ingest preserves them exactly.
pub fn write_dataset_csv(dataset: &Dataset, out: &mut impl Write) -> Result<()> {
    let mut header = vec!["unique_id".to_string(), "ds".to_string(), "y".to_string()];
    header.extend(dataset.exog_names.iter().cloned());
    writeln!(out, "{}", header.join(","))?;
    for (ts, stamps) in dataset.series.iter().zip(&dataset.timestamps) {
        for (i, (&y, ds)) in ts.values.iter().zip(stamps).enumerate() {
            let mut row = format!("{},{},{}", ts.id, ds, y);
            if let Some(exog) = &ts.exog {
                for v in &exog[i] {
                    row.push(',');
                    row.push_str(&v.to_string());
                }
            }
            writeln!(out, "{row}")?;
        }
    }
    Ok(())
}
