//! The two-line Theta method in its standard form.
//!
//! The series is optionally deseasonalized by classical multiplicative
//! decomposition, then split into the theta=0 line (the least-squares linear
//! trend) and the theta=2 line `2y - trend`. Each line extends as its own
//! trend extrapolation plus an SES fold of its detrended remainder (zero for
//! the theta=0 line); the forecast reseasonalizes the average of the two
//! extensions. The SES weight for the remainder is gradient-fitted.

use crate::error::{Error, Result};
use crate::models::smoothing::{self, SmoothingKind};

/// Minimum observations for an unseasonal Theta fit.
const MIN_LEN: usize = 3;

/// Everything a fitted Theta model needs to forecast and to be re-applied to
/// a new history with the smoothing weight frozen.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaFit {
    pub season_length: usize,
    /// Multiplicative seasonal indices, mean-normalized (all ones when
    /// season_length is 1 or the decomposition degenerates).
    pub seasonal: Vec<f64>,
    pub intercept: f64,
    pub slope: f64,
    /// Fitted SES weight for the detrended theta=2 remainder.
    pub alpha: f64,
    /// Final SES level of the detrended theta=2 remainder.
    pub remainder_level: f64,
    pub n: usize,
}

pub fn fit_theta(series: &[f64], season_length: usize) -> Result<ThetaFit> {
    fit_theta_inner(series, season_length, None)
}

/// Refits the data-derived components on a new history while keeping a
/// previously learned SES weight.
pub fn refit_theta(series: &[f64], season_length: usize, frozen_alpha: f64) -> Result<ThetaFit> {
    fit_theta_inner(series, season_length, Some(frozen_alpha))
}

fn fit_theta_inner(
    series: &[f64],
    season_length: usize,
    frozen_alpha: Option<f64>,
) -> Result<ThetaFit> {
    if season_length == 0 {
        return Err(Error::Config("season length must be at least 1".into()));
    }
    let needed = if season_length > 1 {
        MIN_LEN.max(2 * season_length)
    } else {
        MIN_LEN
    };
    if series.len() < needed {
        return Err(Error::TooShort {
            needed,
            got: series.len(),
        });
    }

    let seasonal = if season_length > 1 {
        classical_seasonal_indices(series, season_length)
    } else {
        vec![1.0]
    };
    let deseasonalized: Vec<f64> = series
        .iter()
        .enumerate()
        .map(|(t, &y)| y / seasonal[t % seasonal.len()])
        .collect();

    let (intercept, slope) = linear_trend(&deseasonalized);
    // theta=2 remainder: 2y - trend detrended again by the shared trend,
    // i.e. twice the trend residuals.
    let remainder: Vec<f64> = deseasonalized
        .iter()
        .enumerate()
        .map(|(t, &y)| 2.0 * (y - (intercept + slope * (t + 1) as f64)))
        .collect();

    let (alpha, remainder_level) = match frozen_alpha {
        Some(alpha) => {
            let init = smoothing::initial_state(SmoothingKind::Ses, &remainder, 1, 1.0)?;
            let fit = smoothing::replay(SmoothingKind::Ses, &init, &[alpha], &remainder, 1, 1.0)?;
            (alpha, fit.final_carry.level)
        }
        None => {
            let fit = smoothing::fit_smoothing(SmoothingKind::Ses, &remainder, 1, 1.0)?;
            (fit.alpha, fit.final_carry.level)
        }
    };

    Ok(ThetaFit {
        season_length,
        seasonal,
        intercept,
        slope,
        alpha,
        remainder_level,
        n: series.len(),
    })
}

/// Forecast: the average of the theta=0 and theta=2 line extensions,
/// reseasonalized. Algebraically `trend(T+k) + remainder_level/2` times the
/// seasonal index.
pub fn predict_theta(fit: &ThetaFit, horizon: usize) -> Vec<f64> {
    (1..=horizon)
        .map(|k| {
            let t = fit.n + k;
            let trend = fit.intercept + fit.slope * t as f64;
            let theta0 = trend;
            let theta2 = trend + fit.remainder_level;
            let s = fit.seasonal[(t - 1) % fit.seasonal.len()];
            0.5 * (theta0 + theta2) * s
        })
        .collect()
}

/// Convenience fit-and-forecast in one call.
pub fn theta_forecast(series: &[f64], horizon: usize, season_length: usize) -> Result<Vec<f64>> {
    let fit = fit_theta(series, season_length)?;
    Ok(predict_theta(&fit, horizon))
}

/// Ordinary least squares of y on t = 1..n; returns (intercept, slope).
fn linear_trend(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let t_mean = (n + 1.0) / 2.0;
    let y_mean = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &v) in y.iter().enumerate() {
        let dt = (i + 1) as f64 - t_mean;
        num += dt * (v - y_mean);
        den += dt * dt;
    }
    let slope = if den == 0.0 { 0.0 } else { num / den };
    (y_mean - slope * t_mean, slope)
}

/// Multiplicative seasonal indices by classical decomposition: ratios to a
/// centered moving average, averaged per position and normalized to mean 1.
/// Falls back to all ones if the decomposition degenerates.
fn classical_seasonal_indices(series: &[f64], m: usize) -> Vec<f64> {
    let n = series.len();
    let half = m / 2;
    let mut ratio_sums = vec![0.0; m];
    let mut ratio_counts = vec![0usize; m];
    for t in half..n.saturating_sub(half) {
        let cma = if m.is_multiple_of(2) {
            // 2 x m moving average for even periods.
            if t < half || t + half >= n {
                continue;
            }
            let mut sum = 0.5 * series[t - half] + 0.5 * series[t + half];
            sum += series[t - half + 1..t + half].iter().sum::<f64>();
            sum / m as f64
        } else {
            let sum: f64 = series[t - half..=t + half].iter().sum();
            sum / m as f64
        };
        if cma != 0.0 {
            ratio_sums[t % m] += series[t] / cma;
            ratio_counts[t % m] += 1;
        }
    }
    let mut indices: Vec<f64> = ratio_sums
        .iter()
        .zip(&ratio_counts)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 1.0 })
        .collect();
    let mean = indices.iter().sum::<f64>() / m as f64;
    if !(mean.is_finite()) || mean <= 0.0 || indices.iter().any(|&i| !i.is_finite() || i <= 0.0) {
        return vec![1.0; m];
    }
    for i in &mut indices {
        *i /= mean;
    }
    indices
}
