//! GARCH(1,1) conditional-volatility model in its standard form.
//!
//! The series is demeaned and the variance recursion
//! `sigma2_t = omega + a*eps2_{t-1} + b*sigma2_{t-1}` is run as a scan.
//! Parameters are fitted by minimizing the Gaussian negative log-likelihood
//! `sum(ln sigma2_t + eps2_t / sigma2_t)` with the bounded optimizer; the
//! stationarity constraint `a + b < 1` is kept by fitting `(omega, a, u)`
//! with `b = u * (1 - a)`, which maps the optimizer's box strictly inside
//! the stationary region. The point (mean) forecast is the sample mean.

use crate::error::{Error, Result};
use crate::fold::{self, Objective, Scalar};

/// Smallest admissible conditional variance.
pub const VARIANCE_FLOOR: f64 = 1e-12;
/// Minimum observations for a GARCH fit.
pub const MIN_LEN: usize = 10;
const PARAM_HI: f64 = 0.9999;

/// A fitted GARCH(1,1) model.
#[derive(Debug, Clone, PartialEq)]
pub struct GarchFit {
    pub omega: f64,
    pub a: f64,
    pub b: f64,
    /// Sample mean removed from the observations.
    pub mean: f64,
    /// In-sample conditional variances (sigma2_1 is the sample variance).
    pub variance: Vec<f64>,
    pub neg_log_likelihood: f64,
}

impl GarchFit {
    /// Long-run variance `omega / (1 - a - b)`.
    pub fn unconditional_variance(&self) -> f64 {
        self.omega / (1.0 - self.a - self.b)
    }
}

/// Negative log-likelihood over t = 2..T; the t = 1 term is a constant in
/// the parameters because sigma2_1 is pinned to the sample variance. The
/// likelihood accumulates in the scan carry, so evaluation allocates nothing
/// per step.
pub(crate) fn garch_nll<T: Scalar>(
    omega: T,
    a: T,
    b: T,
    eps: &[f64],
    sigma2_init: f64,
) -> T {
    let floor = T::from_f64(VARIANCE_FLOOR);
    let scanned = fold::scan(
        |(sigma2, eps2_prev, acc): (T, T, T), eps_t: f64| {
            let sigma2_next = (omega + a * eps2_prev + b * sigma2).max(floor);
            let eps2 = T::from_f64(eps_t * eps_t);
            let acc = acc + sigma2_next.ln() + eps2 / sigma2_next;
            ((sigma2_next, eps2, acc), ())
        },
        (
            T::from_f64(sigma2_init),
            T::from_f64(eps[0] * eps[0]),
            T::from_f64(0.0),
        ),
        &eps[1..],
    )
    .expect("series length validated");
    scanned.final_carry.2
}

/// The optimizer sees the mean (per-step) negative log-likelihood over a
/// rescaled parameter vector `(omega/var, a, u)` with `b = u * (1 - a)`:
/// same minimizers, but every coordinate is O(1), which keeps a single
/// gradient step size meaningful across all three.
struct GarchObjective<'a> {
    eps: &'a [f64],
    sigma2_init: f64,
}

impl Objective for GarchObjective<'_> {
    fn eval<T: Scalar>(&self, params: &[T]) -> T {
        let one = T::from_f64(1.0);
        let omega = params[0] * T::from_f64(self.sigma2_init);
        let (a, u) = (params[1], params[2]);
        let b = u * (one - a);
        garch_nll(omega, a, b, self.eps, self.sigma2_init)
            / T::from_f64((self.eps.len() - 1) as f64)
    }
}

pub fn fit_garch(series: &[f64]) -> Result<GarchFit> {
    if series.len() < MIN_LEN {
        return Err(Error::TooShort {
            needed: MIN_LEN,
            got: series.len(),
        });
    }
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    let eps: Vec<f64> = series.iter().map(|&y| y - mean).collect();
    let variance = (eps.iter().map(|e| e * e).sum::<f64>() / eps.len() as f64).max(VARIANCE_FLOOR);

    let objective = GarchObjective {
        eps: &eps,
        sigma2_init: variance,
    };
    // omega is fitted in units of the sample variance.
    let init = [0.1, 0.05, 0.9 / 0.95];
    let omega_lo = (VARIANCE_FLOOR / variance).min(1e-4);
    let bounds = [(omega_lo, 10.0), (0.0, PARAM_HI), (0.0, PARAM_HI)];
    let fitted = fold::minimize(&objective, &init, &bounds)?;
    let (omega, a) = (fitted[0] * variance, fitted[1]);
    let b = fitted[2] * (1.0 - a);

    // Checked replay of the variance recursion at the optimum.
    let mut var_path = Vec::with_capacity(eps.len());
    var_path.push(variance);
    for t in 1..eps.len() {
        let prev = var_path[t - 1];
        let next = (omega + a * eps[t - 1] * eps[t - 1] + b * prev).max(VARIANCE_FLOOR);
        if !next.is_finite() {
            return Err(Error::NumericDomain {
                step: t,
                what: "non-finite conditional variance",
            });
        }
        var_path.push(next);
    }
    let nll = garch_nll(omega, a, b, &eps, variance);
    if !nll.is_finite() {
        return Err(Error::NonFiniteObjective { param: None });
    }

    Ok(GarchFit {
        omega,
        a,
        b,
        mean,
        variance: var_path,
        neg_log_likelihood: nll,
    })
}

/// Re-applies fitted `(omega, a, b)` to a new history: demeans it, replays
/// the variance recursion, and returns the refreshed fit state.
pub fn reapply_garch(fit: &GarchFit, series: &[f64]) -> Result<GarchFit> {
    if series.len() < MIN_LEN {
        return Err(Error::TooShort {
            needed: MIN_LEN,
            got: series.len(),
        });
    }
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    let eps: Vec<f64> = series.iter().map(|&y| y - mean).collect();
    let variance = (eps.iter().map(|e| e * e).sum::<f64>() / eps.len() as f64).max(VARIANCE_FLOOR);
    let mut var_path = Vec::with_capacity(eps.len());
    var_path.push(variance);
    for t in 1..eps.len() {
        let prev = var_path[t - 1];
        var_path.push((fit.omega + fit.a * eps[t - 1] * eps[t - 1] + fit.b * prev).max(VARIANCE_FLOOR));
    }
    Ok(GarchFit {
        omega: fit.omega,
        a: fit.a,
        b: fit.b,
        mean,
        variance: var_path,
        neg_log_likelihood: garch_nll(fit.omega, fit.a, fit.b, &eps, variance),
    })
}

/// h-step variance forecasts, iterating
/// `sigma2_{T+k} = omega + (a + b) * sigma2_{T+k-1}` from the last in-sample
/// conditional variance.
pub fn forecast_variance(fit: &GarchFit, horizon: usize) -> Vec<f64> {
    let persistence = fit.a + fit.b;
    let mut out = Vec::with_capacity(horizon);
    let mut sigma2 = *fit.variance.last().expect("fit holds at least one variance");
    for _ in 0..horizon {
        sigma2 = fit.omega + persistence * sigma2;
        out.push(sigma2);
    }
    out
}

/// Fit plus forecast: h-step variance forecasts and the flat mean forecast.
pub fn garch_fit_forecast(series: &[f64], horizon: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let fit = fit_garch(series)?;
    let variance = forecast_variance(&fit, horizon);
    let mean = vec![fit.mean; horizon];
    Ok((variance, mean))
}
