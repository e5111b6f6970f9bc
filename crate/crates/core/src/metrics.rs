//! Point and probabilistic forecast-accuracy metrics, plus the cold/warm
//! timing harness.
//!
//! Scalar metrics operate on one horizon; the `*_batch` variants evaluate a
//! `(n_series, horizon)` collection as the uniform mean of per-series values.
//! MASE here scales by the one-step naive error over the holdout itself, not
//! by a training-set seasonal naive; see the function docs.

use crate::error::{Error, Result};
use std::time::Instant;

fn check_pair(y_true: &[f64], y_pred: &[f64]) -> Result<()> {
    if y_true.is_empty() {
        return Err(Error::EmptyInput);
    }
    if y_true.len() != y_pred.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} true values vs {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    Ok(())
}

/// Mean absolute error.
pub fn mae(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_pair(y_true, y_pred)?;
    let sum: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (t - p).abs())
        .sum();
    Ok(sum / y_true.len() as f64)
}

/// Mean squared error.
pub fn mse(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_pair(y_true, y_pred)?;
    let sum: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (t - p) * (t - p))
        .sum();
    Ok(sum / y_true.len() as f64)
}

/// Root mean squared error.
pub fn rmse(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    Ok(mse(y_true, y_pred)?.sqrt())
}

/// Mean absolute percentage error, in percent. Zero true values are a domain
/// error naming the offending index.
pub fn mape(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_pair(y_true, y_pred)?;
    if let Some(index) = y_true.iter().position(|&t| t == 0.0) {
        return Err(Error::ZeroTrueValue { index });
    }
    let sum: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| ((t - p) / t).abs())
        .sum();
    Ok(100.0 / y_true.len() as f64 * sum)
}

/// Symmetric MAPE with terms `2|e| / (|y| + |yhat|)`, in percent and bounded
/// by 200. Terms where both operands are zero contribute zero.
pub fn smape(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_pair(y_true, y_pred)?;
    let sum: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| {
            let denom = t.abs() + p.abs();
            if denom == 0.0 {
                0.0
            } else {
                2.0 * (t - p).abs() / denom
            }
        })
        .sum();
    Ok(100.0 / y_true.len() as f64 * sum)
}

/// Mean error `mean(y_true - y_pred)`.
pub fn bias(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_pair(y_true, y_pred)?;
    let sum: f64 = y_true.iter().zip(y_pred).map(|(t, p)| t - p).sum();
    Ok(sum / y_true.len() as f64)
}

/// Cumulative error `sum(y_true - y_pred)`.
pub fn cumulative_error(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_pair(y_true, y_pred)?;
    Ok(y_true.iter().zip(y_pred).map(|(t, p)| t - p).sum())
}

/// Mean absolute scaled error with the holdout-naive denominator: the MAE is
/// scaled by the mean absolute one-step difference of `y_true` itself. A
/// constant holdout has a zero denominator and is a domain error.
pub fn mase(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_pair(y_true, y_pred)?;
    let h = y_true.len();
    if h < 2 {
        return Err(Error::TooShort { needed: 2, got: h });
    }
    let denom: f64 = y_true.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>()
        / (h - 1) as f64;
    if denom == 0.0 {
        return Err(Error::ZeroDenominator("MASE holdout-naive scale"));
    }
    Ok(mae(y_true, y_pred)? / denom)
}

/// Pinball loss at quantile `q`: mean of `max(q*e, (q-1)*e)` with
/// `e = y_true - y_pred`.
pub fn quantile_loss(y_true: &[f64], y_pred_q: &[f64], q: f64) -> Result<f64> {
    check_pair(y_true, y_pred_q)?;
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidInput(format!("quantile {q} outside [0, 1]")));
    }
    let sum: f64 = y_true
        .iter()
        .zip(y_pred_q)
        .map(|(t, p)| {
            let e = t - p;
            (q * e).max((q - 1.0) * e)
        })
        .sum();
    Ok(sum / y_true.len() as f64)
}

/// Mean pinball loss over a set of quantiles. `y_pred_q[i]` holds the
/// horizon-length predictions for quantile `qs[i]`.
pub fn multi_quantile_loss(y_true: &[f64], y_pred_q: &[Vec<f64>], qs: &[f64]) -> Result<f64> {
    if qs.is_empty() || y_pred_q.len() != qs.len() {
        return Err(Error::InvalidInput(format!(
            "{} quantile tracks for {} quantiles",
            y_pred_q.len(),
            qs.len()
        )));
    }
    let mut acc = 0.0;
    for (preds, &q) in y_pred_q.iter().zip(qs) {
        acc += quantile_loss(y_true, preds, q)?;
    }
    Ok(acc / qs.len() as f64)
}

/// CRPS approximated as twice the mean multi-quantile loss, normalized by
/// `mean |y_true|`. A zero normalizer is a domain error.
pub fn scaled_crps(y_true: &[f64], y_pred_q: &[Vec<f64>], qs: &[f64]) -> Result<f64> {
    let mql = multi_quantile_loss(y_true, y_pred_q, qs)?;
    let norm = y_true.iter().map(|t| t.abs()).sum::<f64>() / y_true.len() as f64;
    if norm == 0.0 {
        return Err(Error::ZeroDenominator("scaled CRPS normalizer"));
    }
    Ok(2.0 * mql / norm)
}

/// Fraction of true values inside `[lo, hi]`. Bounds must be finite (no
/// infinite sentinels) and satisfy `lo <= hi` elementwise.
pub fn coverage(y_true: &[f64], lo: &[f64], hi: &[f64]) -> Result<f64> {
    check_pair(y_true, lo)?;
    check_pair(y_true, hi)?;
    if let Some(index) = lo
        .iter()
        .zip(hi)
        .position(|(l, h)| !l.is_finite() || !h.is_finite())
    {
        return Err(Error::NonFiniteData { index });
    }
    if let Some(index) = lo.iter().zip(hi).position(|(l, h)| l > h) {
        return Err(Error::InvalidInput(format!(
            "interval bound {index} has lo > hi"
        )));
    }
    let inside = y_true
        .iter()
        .zip(lo.iter().zip(hi))
        .filter(|(t, (l, h))| **t >= **l && **t <= **h)
        .count();
    Ok(inside as f64 / y_true.len() as f64)
}

/// Fraction of true values at or below the quantile predictions; compare
/// against the nominal quantile to judge calibration.
pub fn calibration(y_true: &[f64], y_pred_q: &[f64]) -> Result<f64> {
    check_pair(y_true, y_pred_q)?;
    let below = y_true
        .iter()
        .zip(y_pred_q)
        .filter(|(t, p)| t <= p)
        .count();
    Ok(below as f64 / y_true.len() as f64)
}

fn batch_mean(
    y_true: &[Vec<f64>],
    y_pred: &[Vec<f64>],
    f: impl Fn(&[f64], &[f64]) -> Result<f64>,
) -> Result<f64> {
    if y_true.is_empty() || y_true.len() != y_pred.len() {
        return Err(Error::InvalidInput(format!(
            "batch length mismatch: {} vs {}",
            y_true.len(),
            y_pred.len()
        )));
    }
    let mut acc = 0.0;
    for (t, p) in y_true.iter().zip(y_pred) {
        acc += f(t, p)?;
    }
    Ok(acc / y_true.len() as f64)
}

/// Uniform per-series mean of [`mae`] over a `(n_series, horizon)` batch.
pub fn mae_batch(y_true: &[Vec<f64>], y_pred: &[Vec<f64>]) -> Result<f64> {
    batch_mean(y_true, y_pred, mae)
}

/// Uniform per-series mean of [`mse`].
pub fn mse_batch(y_true: &[Vec<f64>], y_pred: &[Vec<f64>]) -> Result<f64> {
    batch_mean(y_true, y_pred, mse)
}

/// Uniform per-series mean of [`rmse`].
pub fn rmse_batch(y_true: &[Vec<f64>], y_pred: &[Vec<f64>]) -> Result<f64> {
    batch_mean(y_true, y_pred, rmse)
}

/// Named point-forecast metrics for one evaluated batch, plus the shape the
/// values were computed over.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    /// Holdout length H every metric was computed on.
    pub holdout: usize,
    pub n_series: usize,
    /// Metric name to value; scale-dependent metrics that are undefined for
    /// the data (zero true values, constant holdout) are simply absent.
    pub values: std::collections::BTreeMap<&'static str, f64>,
}

impl MetricReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }
}

/// Evaluates the standard point-forecast suite over a `(n_series, H)` batch:
/// MAE, MSE, RMSE, SMAPE, bias, cumulative error always; MAPE and MASE when
/// their domain conditions hold for every series.
pub fn point_metrics(y_true: &[Vec<f64>], y_pred: &[Vec<f64>]) -> Result<MetricReport> {
    let mut values = std::collections::BTreeMap::new();
    values.insert("mae", mae_batch(y_true, y_pred)?);
    values.insert("mse", mse_batch(y_true, y_pred)?);
    values.insert("rmse", rmse_batch(y_true, y_pred)?);
    values.insert("smape", batch_mean(y_true, y_pred, smape)?);
    values.insert("bias", batch_mean(y_true, y_pred, bias)?);
    values.insert("cumulative_error", batch_mean(y_true, y_pred, cumulative_error)?);
    if let Ok(v) = batch_mean(y_true, y_pred, mape) {
        values.insert("mape", v);
    }
    if let Ok(v) = batch_mean(y_true, y_pred, mase) {
        values.insert("mase", v);
    }
    Ok(MetricReport {
        holdout: y_true[0].len(),
        n_series: y_true.len(),
        values,
    })
}

/// Wall-clock cold/warm timings, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColdWarm {
    /// Duration of the first invocation, including any one-time setup the
    /// runnable performs on first use.
    pub cold: f64,
    /// Mean duration of the following `warm_iters` invocations.
    pub warm: f64,
}

/// Times one cold invocation followed by `warm_iters` warm ones on a
/// monotonic clock. Each invocation's result is materialized (passed through
/// a black box) before its stop timestamp, and the measurements run serially
/// on the calling thread.
pub fn time_cold_warm<R>(mut runnable: impl FnMut() -> R, warm_iters: usize) -> Result<ColdWarm> {
    if warm_iters == 0 {
        return Err(Error::InvalidInput("need at least one warm iteration".into()));
    }
    let start = Instant::now();
    std::hint::black_box(runnable());
    let cold = start.elapsed().as_secs_f64();

    let mut total = 0.0;
    for _ in 0..warm_iters {
        let start = Instant::now();
        std::hint::black_box(runnable());
        total += start.elapsed().as_secs_f64();
    }
    Ok(ColdWarm {
        cold,
        warm: total / warm_iters as f64,
    })
}
