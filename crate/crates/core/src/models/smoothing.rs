//! Exponential smoothing (SES, Holt, seasonal ES, Holt-Winters) as scan
//! steps with gradient-fitted smoothing parameters.
//!
//! All four models share one step function over a carry of level, trend and a
//! multiplicative seasonal ring buffer; the non-seasonal and trendless models
//! are the same recursion with the corresponding components frozen. The
//! implemented variant is additive (optionally damped) trend with
//! multiplicative seasonality; other component combinations are rejected.

use crate::error::{Error, Result};
use crate::fold::{self, Objective, Scalar};

/// Lower/upper clamp for fitted smoothing parameters. Keeping the box strictly
/// inside [0, 1] keeps the dual-number gradients finite at the edge.
pub const PARAM_LO: f64 = 0.0001;
pub const PARAM_HI: f64 = 0.9999;
/// Starting value for every fitted smoothing parameter.
const PARAM_INIT: f64 = 0.1;
/// Seasonal indices are clipped this far away from zero at initialization.
const SEASONAL_FLOOR: f64 = 1e-8;

/// Which smoothing model a carry/fit describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothingKind {
    Ses,
    Holt,
    SeasonalEs,
    HoltWinters,
}

impl SmoothingKind {
    pub fn has_trend(self) -> bool {
        matches!(self, SmoothingKind::Holt | SmoothingKind::HoltWinters)
    }

    pub fn is_seasonal(self) -> bool {
        matches!(self, SmoothingKind::SeasonalEs | SmoothingKind::HoltWinters)
    }

    /// Minimum trainable length: 2 observations for SES, 3 for Holt, two full
    /// seasons for the seasonal models.
    pub fn min_len(self, season_length: usize) -> usize {
        match self {
            SmoothingKind::Ses => 2,
            SmoothingKind::Holt => 3,
            SmoothingKind::SeasonalEs | SmoothingKind::HoltWinters => 2 * season_length,
        }
    }
}

/// The immutable per-step state of a smoothing recursion.
///
/// The seasonal buffer has length `season_length` and is ordered oldest
/// first: entry 0 is the factor consumed by the current step, and each update
/// rotates the buffer left and writes the refreshed factor at the end. For
/// non-seasonal models the buffer is the multiplicative-neutral `[1.0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingCarry<T> {
    pub level: T,
    pub trend: T,
    pub seasonal: Vec<T>,
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub phi: T,
}

/// One Holt-Winters update. Consumes the observation `y`, returns the new
/// carry and the one-step-ahead prediction made before seeing `y`:
///
/// ```text
/// y_hat = (l + phi*b) * s
/// l' = alpha*(y/s) + (1-alpha)*(l + phi*b)
/// b' = beta*(l'-l) + (1-beta)*phi*b
/// s' = gamma*(y/l') + (1-gamma)*s
/// ```
///
/// Checked variant: division by a zero seasonal factor or zero updated level
/// is reported as a numeric-domain error carrying the step index (the caller
/// provides `step` for the message).
pub fn hw_step<T: Scalar>(
    carry: SmoothingCarry<T>,
    y: T,
    step: usize,
) -> Result<(SmoothingCarry<T>, T)> {
    let s_lag = carry.seasonal[0];
    if s_lag.value() == 0.0 {
        return Err(Error::NumericDomain {
            step,
            what: "seasonal factor is zero",
        });
    }
    let (next, y_hat) = hw_step_raw(carry, y);
    if next.level.value() == 0.0 && next.gamma.value() != 0.0 {
        return Err(Error::NumericDomain {
            step,
            what: "updated level is zero in seasonal update",
        });
    }
    Ok((next, y_hat))
}

/// Unchecked step used inside objectives: IEEE semantics propagate any
/// division by zero as inf/NaN, which the optimizer rejects via line search.
pub(crate) fn hw_step_raw<T: Scalar>(mut carry: SmoothingCarry<T>, y: T) -> (SmoothingCarry<T>, T) {
    let one = T::from_f64(1.0);
    let s_lag = carry.seasonal[0];
    let damped_trend = carry.phi * carry.trend;
    let y_hat = (carry.level + damped_trend) * s_lag;

    let level_new = carry.alpha * (y / s_lag) + (one - carry.alpha) * (carry.level + damped_trend);
    let trend_new = carry.beta * (level_new - carry.level) + (one - carry.beta) * damped_trend;
    // gamma == 0 short-circuits the seasonal refresh so a zero level cannot
    // poison a frozen seasonal state with NaN.
    let s_new = if carry.gamma.value() == 0.0 {
        s_lag
    } else {
        carry.gamma * (y / level_new) + (one - carry.gamma) * s_lag
    };
    carry.seasonal.rotate_left(1);
    let m = carry.seasonal.len();
    carry.seasonal[m - 1] = s_new;
    carry.level = level_new;
    carry.trend = trend_new;
    (carry, y_hat)
}

/// Data-derived initial state, independent of the smoothing parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingInit {
    pub level: f64,
    pub trend: f64,
    pub seasonal: Vec<f64>,
    /// Set when the series is constant: seasonal indices are pinned to 1 and
    /// gamma is frozen at 0 to avoid degenerate multiplicative updates.
    pub gamma_frozen: bool,
}

/// Conventional deterministic initialization: the level anchor comes from
/// the first season's mean (the first value for non-seasonal models), the
/// trend from the difference of the first two season means, and the seasonal
/// indices from the first season's ratios to the anchor. The stored level is
/// the anchor shifted back one trend step, so the recursion's first
/// prediction `(l + phi*b) * s` lands on the anchor.
pub fn initial_state(
    kind: SmoothingKind,
    series: &[f64],
    season_length: usize,
    phi: f64,
) -> Result<SmoothingInit> {
    let m = if kind.is_seasonal() { season_length } else { 1 };
    if m == 0 {
        return Err(Error::Config("season length must be at least 1".into()));
    }
    let needed = kind.min_len(m);
    if series.len() < needed {
        return Err(Error::TooShort {
            needed,
            got: series.len(),
        });
    }

    let first_mean = series[..m].iter().sum::<f64>() / m as f64;
    let anchor = if kind.is_seasonal() { first_mean } else { series[0] };
    let trend = if kind.has_trend() {
        let second_mean = series[m..2 * m].iter().sum::<f64>() / m as f64;
        (second_mean - first_mean) / m as f64
    } else {
        0.0
    };
    let level = anchor - phi * trend;

    let constant = series.iter().all(|&v| v == series[0]);
    let seasonal: Vec<f64> = if constant || !kind.is_seasonal() {
        vec![1.0; m]
    } else {
        series[..m]
            .iter()
            .map(|&v| {
                let idx = v / anchor;
                if !idx.is_finite() {
                    1.0
                } else if idx.abs() < SEASONAL_FLOOR {
                    SEASONAL_FLOOR.copysign(if idx == 0.0 { 1.0 } else { idx })
                } else {
                    idx
                }
            })
            .collect()
    };

    Ok(SmoothingInit {
        level,
        trend,
        seasonal,
        gamma_frozen: constant || !kind.is_seasonal(),
    })
}

fn build_carry<T: Scalar>(
    kind: SmoothingKind,
    init: &SmoothingInit,
    params: &[T],
    phi: f64,
) -> SmoothingCarry<T> {
    let zero = T::from_f64(0.0);
    let alpha = params[0];
    let mut next = 1;
    let beta = if kind.has_trend() {
        let b = params[next];
        next += 1;
        b
    } else {
        zero
    };
    let gamma = if kind.is_seasonal() && !init.gamma_frozen {
        params[next]
    } else {
        zero
    };
    SmoothingCarry {
        level: T::from_f64(init.level),
        trend: T::from_f64(init.trend),
        seasonal: init.seasonal.iter().map(|&s| T::from_f64(s)).collect(),
        alpha,
        beta,
        gamma,
        phi: T::from_f64(phi),
    }
}

fn param_count(kind: SmoothingKind, init: &SmoothingInit) -> usize {
    1 + kind.has_trend() as usize + (kind.is_seasonal() && !init.gamma_frozen) as usize
}

/// Sum of squared one-step-ahead errors of the smoothing recursion, generic
/// over the scalar type so the optimizer can differentiate through the scan.
/// The squared error is folded into the carry alongside the smoothing state,
/// so evaluation allocates nothing per step.
pub fn sse_objective<T: Scalar>(
    kind: SmoothingKind,
    params: &[T],
    init: &SmoothingInit,
    series: &[f64],
    phi: f64,
) -> T {
    if series.is_empty() {
        return T::from_f64(0.0);
    }
    let carry = build_carry(kind, init, params, phi);
    let scanned = fold::scan(
        |(c, acc): (SmoothingCarry<T>, T), y: f64| {
            let y = T::from_f64(y);
            let (next, y_hat) = hw_step_raw(c, y);
            let r = y - y_hat;
            ((next, acc + r * r), ())
        },
        (carry, T::from_f64(0.0)),
        series,
    )
    .expect("series validated non-empty");
    scanned.final_carry.1
}

/// The optimizer sees the mean squared error: a positive rescaling of the
/// SSE with the same minimizers, but with gradients that stay O(1) in the
/// series length so the line search and tolerances behave uniformly.
struct SmoothingMse<'a> {
    kind: SmoothingKind,
    init: &'a SmoothingInit,
    series: &'a [f64],
    phi: f64,
}

impl Objective for SmoothingMse<'_> {
    fn eval<T: Scalar>(&self, params: &[T]) -> T {
        sse_objective(self.kind, params, self.init, self.series, self.phi)
            / T::from_f64(self.series.len() as f64)
    }
}

/// A fitted smoothing model: optimized parameters, the final carry after
/// replaying the training series, and in-sample fitted values.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingFit {
    pub kind: SmoothingKind,
    pub season_length: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub phi: f64,
    pub final_carry: SmoothingCarry<f64>,
    pub fitted: Vec<f64>,
    pub sse: f64,
    /// Residual standard deviation of the in-sample fit.
    pub sigma: f64,
}

/// Fits the smoothing parameters by minimizing the in-sample SSE with
/// bounded gradient descent, then replays the recursion at the optimum.
pub fn fit_smoothing(
    kind: SmoothingKind,
    series: &[f64],
    season_length: usize,
    phi: f64,
) -> Result<SmoothingFit> {
    if !(phi > 0.0 && phi <= 1.0) {
        return Err(Error::Config(format!(
            "damping parameter must be in (0, 1], got {phi}"
        )));
    }
    let init = initial_state(kind, series, season_length, phi)?;
    let n_params = param_count(kind, &init);
    let objective = SmoothingMse {
        kind,
        init: &init,
        series,
        phi,
    };
    let start = vec![PARAM_INIT; n_params];
    let bounds = vec![(PARAM_LO, PARAM_HI); n_params];
    let params = fold::minimize(&objective, &start, &bounds)?;

    replay(kind, &init, &params, series, season_length, phi)
}

/// Re-runs the recursion at fixed parameters (the checked scan), producing
/// the fitted values and final carry. Used by `fit_smoothing` and by
/// `forward`-style refits on a new history.
pub fn replay(
    kind: SmoothingKind,
    init: &SmoothingInit,
    params: &[f64],
    series: &[f64],
    season_length: usize,
    phi: f64,
) -> Result<SmoothingFit> {
    let carry = build_carry::<f64>(kind, init, params, phi);
    let mut state = carry;
    let mut fitted = Vec::with_capacity(series.len());
    for (step, &y) in series.iter().enumerate() {
        let (next, y_hat) = hw_step(state, y, step)?;
        state = next;
        fitted.push(y_hat);
    }
    let sse: f64 = series
        .iter()
        .zip(&fitted)
        .map(|(y, f)| (y - f) * (y - f))
        .sum();
    let sigma = (sse / series.len() as f64).sqrt();

    Ok(SmoothingFit {
        kind,
        season_length: if kind.is_seasonal() { season_length } else { 1 },
        alpha: state.alpha,
        beta: state.beta,
        gamma: state.gamma,
        phi,
        final_carry: state,
        fitted,
        sse,
        sigma,
    })
}

impl SmoothingFit {
    /// The fitted parameters in the layout `minimize` saw them.
    pub fn params(&self) -> Vec<f64> {
        let mut p = vec![self.alpha];
        if self.kind.has_trend() {
            p.push(self.beta);
        }
        if self.kind.is_seasonal() && self.gamma != 0.0 {
            p.push(self.gamma);
        }
        p
    }
}

/// Point forecasts from a fitted smoothing model:
/// step k ahead is `(l + (phi + ... + phi^k) * b) * s[(k-1) mod m]`.
pub fn predict_smoothing(fit: &SmoothingFit, horizon: usize) -> Vec<f64> {
    let carry = &fit.final_carry;
    let m = carry.seasonal.len();
    let mut out = Vec::with_capacity(horizon);
    let mut phi_sum = 0.0;
    let mut phi_pow = 1.0;
    for k in 1..=horizon {
        phi_pow *= fit.phi;
        phi_sum += phi_pow;
        let s = carry.seasonal[(k - 1) % m];
        out.push((carry.level + phi_sum * carry.trend) * s);
    }
    out
}

/// Gaussian in-sample interval half-widths: `z * sigma * sqrt(k)` at step k.
/// This is a convenience band from the fit residuals, not a calibrated one;
/// the conformal layer is the distribution-free path.
pub fn gaussian_half_widths(fit: &SmoothingFit, horizon: usize, level: f64) -> Vec<f64> {
    let z = normal_quantile(0.5 + level / 200.0);
    (1..=horizon)
        .map(|k| z * fit.sigma * (k as f64).sqrt())
        .collect()
}

/// Inverse standard-normal CDF (Acklam's rational approximation, |eps| < 1.2e-9).
fn normal_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}
