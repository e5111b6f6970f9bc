//! The `conformal-cv` command: dump per-series conformity score matrices.

use crate::error::{CliError, Result};
use crate::ingest::Dataset;
use foldcast_core::conformal::{self, ConformalConfig, ConformityMatrix};
use foldcast_core::models::Model;
use std::io::Write;

/// Computes the K x h conformity matrix for every series in the dataset.
pub fn run_conformal_cv(
    dataset: &Dataset,
    model: &Model,
    config: &ConformalConfig,
) -> Result<Vec<(String, ConformityMatrix)>> {
    dataset
        .series
        .iter()
        .map(|s| {
            conformal::conformity_scores(model, s, config)
                .map(|m| (s.id.clone(), m))
                .map_err(|e| CliError::Model(format!("series '{}': {e}", s.id)))
        })
        .collect()
}

/// CSV layout: `unique_id,window,s1..sh`, one row per calibration window.
pub fn write_scores_csv(
    scores: &[(String, ConformityMatrix)],
    horizon: usize,
    out: &mut impl Write,
) -> Result<()> {
    let mut header = vec!["unique_id".to_string(), "window".to_string()];
    header.extend((1..=horizon).map(|k| format!("s{k}")));
    writeln!(out, "{}", header.join(","))?;
    for (id, matrix) in scores {
        for (w, row) in matrix.rows().iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{},{},{}", id, w + 1, cells.join(","))?;
        }
    }
    Ok(())
}
