//! Core data model: series, forecast requests, and forecast results.

use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// One univariate history, optionally with an aligned exogenous matrix.
///
/// The exogenous matrix is row-major with one row per time step; it may carry
/// more rows than the target so the trailing rows can serve as future
/// covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub id: String,
    pub values: Vec<f64>,
    pub exog: Option<Vec<Vec<f64>>>,
}

impl TimeSeries {
    pub fn new(id: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (index, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteData { index });
            }
        }
        Ok(TimeSeries {
            id: id.into(),
            values,
            exog: None,
        })
    }

    pub fn with_exog(
        id: impl Into<String>,
        values: Vec<f64>,
        exog: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let mut ts = Self::new(id, values)?;
        if exog.len() < ts.values.len() {
            return Err(Error::InvalidInput(format!(
                "exogenous matrix has {} rows but the series has {} observations",
                exog.len(),
                ts.values.len()
            )));
        }
        let width = exog.first().map(|r| r.len()).unwrap_or(0);
        for (index, row) in exog.iter().enumerate() {
            if row.len() != width {
                return Err(Error::InvalidInput(format!(
                    "exogenous row {index} has {} columns, expected {width}",
                    row.len()
                )));
            }
            if let Some(_bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFiniteData { index });
            }
        }
        ts.exog = Some(exog);
        Ok(ts)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// What to forecast: a horizon, optional coverage levels, optional future
/// covariates, and whether to include in-sample fitted values.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRequest {
    pub horizon: usize,
    /// Coverage percentages, strictly increasing, each in (0, 100).
    pub levels: Vec<f64>,
    pub exog_future: Option<Vec<Vec<f64>>>,
    pub include_fitted: bool,
}

impl ForecastRequest {
    pub fn new(horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidInput("horizon must be at least 1".into()));
        }
        Ok(ForecastRequest {
            horizon,
            levels: Vec::new(),
            exog_future: None,
            include_fitted: false,
        })
    }

    pub fn with_levels(mut self, levels: Vec<f64>) -> Result<Self> {
        validate_levels(&levels)?;
        self.levels = levels;
        Ok(self)
    }

    pub fn with_fitted(mut self) -> Self {
        self.include_fitted = true;
        self
    }
}

pub(crate) fn validate_levels(levels: &[f64]) -> Result<()> {
    for pair in levels.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::InvalidInput(format!(
                "levels must be strictly increasing, got {} after {}",
                pair[1], pair[0]
            )));
        }
    }
    for &l in levels {
        if !(l > 0.0 && l < 100.0) {
            return Err(Error::InvalidInput(format!(
                "level {l} outside the open interval (0, 100)"
            )));
        }
    }
    Ok(())
}

/// Point forecasts plus optional interval bands and in-sample fitted values.
///
/// Interval sequences are keyed `lo-{level}` / `hi-{level}`, e.g. `lo-80`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ForecastResult {
    pub mean: Vec<f64>,
    pub intervals: BTreeMap<String, Vec<f64>>,
    pub fitted: Option<Vec<f64>>,
    /// Non-fatal conditions observed while building the result, e.g. a
    /// coverage level beyond what the calibration scores can resolve.
    pub warnings: Vec<String>,
}

impl ForecastResult {
    pub fn from_mean(mean: Vec<f64>) -> Self {
        ForecastResult {
            mean,
            ..Default::default()
        }
    }

    /// Interval bounds for a level, if present.
    pub fn interval(&self, level: f64) -> Option<(&[f64], &[f64])> {
        let lo = self.intervals.get(&level_key("lo", level))?;
        let hi = self.intervals.get(&level_key("hi", level))?;
        Some((lo.as_slice(), hi.as_slice()))
    }
}

/// Formats an interval key: integral levels print without a decimal point
/// (`lo-80`), fractional ones keep it (`lo-97.5`).
pub fn level_key(prefix: &str, level: f64) -> String {
    if level.fract() == 0.0 {
        format!("{prefix}-{}", level as i64)
    } else {
        format!("{prefix}-{level}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(matches!(
            TimeSeries::new("a", vec![]),
            Err(Error::EmptyInput)
        ));
        assert!(matches!(
            TimeSeries::new("a", vec![1.0, f64::NAN]),
            Err(Error::NonFiniteData { index: 1 })
        ));
    }

    #[test]
    fn exog_must_cover_series() {
        let r = TimeSeries::with_exog("a", vec![1.0, 2.0], vec![vec![0.5]]);
        assert!(r.is_err());
        let ok = TimeSeries::with_exog("a", vec![1.0, 2.0], vec![vec![0.5], vec![0.6], vec![0.7]]);
        assert!(ok.is_ok());
    }

    #[test]
    fn levels_validated() {
        assert!(ForecastRequest::new(2)
            .unwrap()
            .with_levels(vec![80.0, 95.0])
            .is_ok());
        assert!(ForecastRequest::new(2)
            .unwrap()
            .with_levels(vec![95.0, 80.0])
            .is_err());
        assert!(ForecastRequest::new(2)
            .unwrap()
            .with_levels(vec![0.0])
            .is_err());
        assert!(ForecastRequest::new(0).is_err());
    }

    #[test]
    fn interval_keys() {
        assert_eq!(level_key("lo", 80.0), "lo-80");
        assert_eq!(level_key("hi", 97.5), "hi-97.5");
    }
}
