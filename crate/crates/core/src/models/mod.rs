//! The shared forecaster contract: model specs, fitting, prediction,
//! fit-plus-predict, and re-application of a fitted model to a new history.
//!
//! `fit` returns an immutable [`FittedModel`]; nothing mutates the spec, and
//! repeated `predict` calls on the same fitted model are identical. Interval
//! output goes through the conformal layer when a [`ConformalConfig`] is
//! attached to the model, or through the optional Gaussian residual bands of
//! the smoothing family.

pub mod baseline;
pub mod garch;
pub mod intermittent;
pub mod smoothing;
pub mod theta;

use crate::conformal::{self, ConformalConfig, ConformityMatrix};
use crate::error::{Error, Result};
use crate::series::{level_key, ForecastRequest, ForecastResult, TimeSeries};
use baseline::BaselineFit;
use garch::GarchFit;
use smoothing::{SmoothingFit, SmoothingKind};
use std::str::FromStr;

/// Trend/error/seasonal component form for the smoothing constructors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentForm {
    Additive,
    Multiplicative,
}

impl FromStr for ComponentForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" | "additive" => Ok(ComponentForm::Additive),
            "M" | "m" | "multiplicative" => Ok(ComponentForm::Multiplicative),
            other => Err(Error::Config(format!(
                "unknown component form '{other}', expected A or M"
            ))),
        }
    }
}

/// Which forecaster to run, with its per-model configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Naive,
    SeasonalNaive {
        season_length: usize,
    },
    HistoricAverage,
    WindowAverage {
        window: usize,
    },
    SeasonalWindowAverage {
        season_length: usize,
        window: usize,
    },
    RandomWalkWithDrift,
    Ses,
    Holt {
        /// Damping parameter in (0, 1]; 1.0 means undamped.
        phi: f64,
    },
    SeasonalEs {
        season_length: usize,
    },
    HoltWinters {
        season_length: usize,
        phi: f64,
        /// Accepted constructor flags; only additive error with
        /// multiplicative seasonality is implemented.
        error_type: ComponentForm,
        season_type: ComponentForm,
    },
    Croston {
        alpha: f64,
    },
    Tsb {
        alpha_demand: f64,
        alpha_probability: f64,
    },
    Adida {
        block_size: Option<usize>,
    },
    Imapa {
        levels: Option<Vec<usize>>,
    },
    Theta {
        season_length: usize,
    },
    Garch,
}

impl ModelSpec {
    pub fn holt_winters(season_length: usize) -> Self {
        ModelSpec::HoltWinters {
            season_length,
            phi: 1.0,
            error_type: ComponentForm::Additive,
            season_type: ComponentForm::Multiplicative,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Naive => "Naive",
            ModelSpec::SeasonalNaive { .. } => "SeasonalNaive",
            ModelSpec::HistoricAverage => "HistoricAverage",
            ModelSpec::WindowAverage { .. } => "WindowAverage",
            ModelSpec::SeasonalWindowAverage { .. } => "SeasonalWindowAverage",
            ModelSpec::RandomWalkWithDrift => "RandomWalkWithDrift",
            ModelSpec::Ses => "SES",
            ModelSpec::Holt { .. } => "Holt",
            ModelSpec::SeasonalEs { .. } => "SeasonalES",
            ModelSpec::HoltWinters { .. } => "HoltWinters",
            ModelSpec::Croston { .. } => "CrostonClassic",
            ModelSpec::Tsb { .. } => "TSB",
            ModelSpec::Adida { .. } => "ADIDA",
            ModelSpec::Imapa { .. } => "IMAPA",
            ModelSpec::Theta { .. } => "Theta",
            ModelSpec::Garch => "GARCH",
        }
    }

    /// Minimum trainable series length.
    pub fn min_len(&self) -> usize {
        match self {
            ModelSpec::Naive | ModelSpec::HistoricAverage => 1,
            ModelSpec::SeasonalNaive { season_length } => *season_length,
            ModelSpec::WindowAverage { window } => *window,
            ModelSpec::SeasonalWindowAverage {
                season_length,
                window,
            } => season_length * window,
            ModelSpec::RandomWalkWithDrift => 2,
            ModelSpec::Ses => 2,
            ModelSpec::Holt { .. } => 3,
            ModelSpec::SeasonalEs { season_length } => 2 * season_length,
            ModelSpec::HoltWinters { season_length, .. } => 2 * season_length,
            ModelSpec::Croston { .. } | ModelSpec::Tsb { .. } => 1,
            ModelSpec::Adida { .. } | ModelSpec::Imapa { .. } => 1,
            ModelSpec::Theta { season_length } => {
                if *season_length > 1 {
                    3usize.max(2 * season_length)
                } else {
                    3
                }
            }
            ModelSpec::Garch => garch::MIN_LEN,
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: usize| -> Result<()> {
            if v == 0 {
                Err(Error::Config(format!("{name} must be at least 1")))
            } else {
                Ok(())
            }
        };
        let weight = |name: &str, v: f64| -> Result<()> {
            if !(0.0..=1.0).contains(&v) {
                Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")))
            } else {
                Ok(())
            }
        };
        match self {
            ModelSpec::SeasonalNaive { season_length }
            | ModelSpec::SeasonalEs { season_length }
            | ModelSpec::Theta { season_length } => positive("season length", *season_length),
            ModelSpec::WindowAverage { window } => positive("window", *window),
            ModelSpec::SeasonalWindowAverage {
                season_length,
                window,
            } => {
                positive("season length", *season_length)?;
                positive("window", *window)
            }
            ModelSpec::Holt { phi } => {
                if !(*phi > 0.0 && *phi <= 1.0) {
                    Err(Error::Config(format!("damping must lie in (0, 1], got {phi}")))
                } else {
                    Ok(())
                }
            }
            ModelSpec::HoltWinters {
                season_length,
                phi,
                error_type,
                season_type,
            } => {
                positive("season length", *season_length)?;
                if !(*phi > 0.0 && *phi <= 1.0) {
                    return Err(Error::Config(format!("damping must lie in (0, 1], got {phi}")));
                }
                if *error_type != ComponentForm::Additive
                    || *season_type != ComponentForm::Multiplicative
                {
                    return Err(Error::Config(
                        "only additive-error, multiplicative-seasonality Holt-Winters is supported"
                            .into(),
                    ));
                }
                Ok(())
            }
            ModelSpec::Croston { alpha } => weight("alpha", *alpha),
            ModelSpec::Tsb {
                alpha_demand,
                alpha_probability,
            } => {
                weight("demand alpha", *alpha_demand)?;
                weight("probability alpha", *alpha_probability)
            }
            ModelSpec::Adida { block_size } => {
                if let Some(0) = block_size {
                    Err(Error::Config("aggregation block size must be at least 1".into()))
                } else {
                    Ok(())
                }
            }
            ModelSpec::Imapa { levels } => {
                if let Some(l) = levels {
                    if l.is_empty() || l.contains(&0) {
                        return Err(Error::Config(
                            "IMAPA aggregation levels must be positive and nonempty".into(),
                        ));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// A spec plus interval configuration. Construction is cheap and the value is
/// never mutated by fitting.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub spec: ModelSpec,
    pub conformal: Option<ConformalConfig>,
    /// Gaussian residual bands for the smoothing family (a convenience; the
    /// conformal path is the calibrated one).
    pub gaussian_intervals: bool,
}

impl Model {
    pub fn new(spec: ModelSpec) -> Self {
        Model {
            spec,
            conformal: None,
            gaussian_intervals: false,
        }
    }

    pub fn with_conformal(mut self, config: ConformalConfig) -> Self {
        self.conformal = Some(config);
        self
    }

    pub fn with_gaussian_intervals(mut self) -> Self {
        self.gaussian_intervals = true;
        self
    }

    pub(crate) fn without_conformal(&self) -> Model {
        Model {
            spec: self.spec.clone(),
            conformal: None,
            gaussian_intervals: false,
        }
    }
}

/// Per-family fitted state.
#[derive(Debug, Clone, PartialEq)]
enum FitState {
    Baseline(BaselineFit),
    Smoothing(SmoothingFit),
    /// Flat forecast level of an intermittent-demand model.
    Intermittent { level: f64 },
    Theta(theta::ThetaFit),
    Garch(GarchFit),
}

/// An immutable fitted model: the spec it came from, the learned state, and
/// optionally the conformity scores harvested during fitting.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    model: Model,
    state: FitState,
    conformity: Option<ConformityMatrix>,
}

impl FittedModel {
    pub fn spec(&self) -> &ModelSpec {
        &self.model.spec
    }

    pub fn conformity(&self) -> Option<&ConformityMatrix> {
        self.conformity.as_ref()
    }

    /// In-sample fitted values, for the families that produce them.
    pub fn fitted_values(&self) -> Option<&[f64]> {
        match &self.state {
            FitState::Smoothing(fit) => Some(&fit.fitted),
            _ => None,
        }
    }

    /// Fitted smoothing parameters, when the model has them.
    pub fn smoothing_fit(&self) -> Option<&SmoothingFit> {
        match &self.state {
            FitState::Smoothing(fit) => Some(fit),
            _ => None,
        }
    }

    pub fn garch_fit(&self) -> Option<&GarchFit> {
        match &self.state {
            FitState::Garch(fit) => Some(fit),
            _ => None,
        }
    }
}

fn fit_state(spec: &ModelSpec, values: &[f64]) -> Result<FitState> {
    Ok(match spec {
        ModelSpec::Naive => FitState::Baseline(baseline::fit_naive(values)?),
        ModelSpec::SeasonalNaive { season_length } => {
            FitState::Baseline(baseline::fit_seasonal_naive(values, *season_length)?)
        }
        ModelSpec::HistoricAverage => FitState::Baseline(baseline::fit_historic_average(values)?),
        ModelSpec::WindowAverage { window } => {
            FitState::Baseline(baseline::fit_window_average(values, *window)?)
        }
        ModelSpec::SeasonalWindowAverage {
            season_length,
            window,
        } => FitState::Baseline(baseline::fit_seasonal_window_average(
            values,
            *season_length,
            *window,
        )?),
        ModelSpec::RandomWalkWithDrift => FitState::Baseline(baseline::fit_drift(values)?),
        ModelSpec::Ses => {
            FitState::Smoothing(smoothing::fit_smoothing(SmoothingKind::Ses, values, 1, 1.0)?)
        }
        ModelSpec::Holt { phi } => FitState::Smoothing(smoothing::fit_smoothing(
            SmoothingKind::Holt,
            values,
            1,
            *phi,
        )?),
        ModelSpec::SeasonalEs { season_length } => FitState::Smoothing(smoothing::fit_smoothing(
            SmoothingKind::SeasonalEs,
            values,
            *season_length,
            1.0,
        )?),
        ModelSpec::HoltWinters {
            season_length, phi, ..
        } => FitState::Smoothing(smoothing::fit_smoothing(
            SmoothingKind::HoltWinters,
            values,
            *season_length,
            *phi,
        )?),
        ModelSpec::Croston { alpha } => FitState::Intermittent {
            level: intermittent::croston_forecast(values, 1, *alpha)?[0],
        },
        ModelSpec::Tsb {
            alpha_demand,
            alpha_probability,
        } => FitState::Intermittent {
            level: intermittent::tsb_forecast(values, 1, *alpha_demand, *alpha_probability)?[0],
        },
        ModelSpec::Adida { block_size } => FitState::Intermittent {
            level: intermittent::adida_forecast(values, 1, *block_size)?[0],
        },
        ModelSpec::Imapa { levels } => FitState::Intermittent {
            level: intermittent::imapa_forecast(values, 1, levels.as_deref())?[0],
        },
        ModelSpec::Theta { season_length } => {
            FitState::Theta(theta::fit_theta(values, *season_length)?)
        }
        ModelSpec::Garch => FitState::Garch(garch::fit_garch(values)?),
    })
}

/// Fits `model` to `series`, harvesting conformity scores first when a
/// conformal configuration is attached.
pub fn fit(model: &Model, series: &TimeSeries) -> Result<FittedModel> {
    model.spec.validate()?;
    let needed = model.spec.min_len();
    if series.len() < needed {
        return Err(Error::TooShort {
            needed,
            got: series.len(),
        });
    }

    let conformity = match &model.conformal {
        Some(config) => {
            // The earliest window must itself be trainable.
            let cuts =
                conformal::partition_windows(series.len(), config.n_windows, config.horizon)?;
            if cuts[0] < needed {
                return Err(Error::TooShort {
                    needed: needed + config.n_windows * config.horizon,
                    got: series.len(),
                });
            }
            Some(conformal::conformity_scores(model, series, config)?)
        }
        None => None,
    };

    Ok(FittedModel {
        model: model.clone(),
        state: fit_state(&model.spec, &series.values)?,
        conformity,
    })
}

fn point_forecasts(state: &FitState, horizon: usize) -> Vec<f64> {
    match state {
        FitState::Baseline(fit) => baseline::predict_baseline(fit, horizon),
        FitState::Smoothing(fit) => smoothing::predict_smoothing(fit, horizon),
        FitState::Intermittent { level } => vec![*level; horizon],
        FitState::Theta(fit) => theta::predict_theta(fit, horizon),
        FitState::Garch(fit) => vec![fit.mean; horizon],
    }
}

/// Generates h-step forecasts from an already fitted model. Pure: repeated
/// calls with the same inputs return identical results.
pub fn predict(fitted: &FittedModel, request: &ForecastRequest) -> Result<ForecastResult> {
    let mean = point_forecasts(&fitted.state, request.horizon);
    let mut result = ForecastResult::from_mean(mean);
    if request.include_fitted {
        result.fitted = fitted.fitted_values().map(|f| f.to_vec());
    }

    if request.levels.is_empty() {
        return Ok(result);
    }

    if let Some(scores) = &fitted.conformity {
        let method = fitted
            .model
            .conformal
            .as_ref()
            .expect("conformity scores imply a conformal config")
            .method;
        return conformal::add_confidence_intervals(result, scores, &request.levels, method);
    }

    if fitted.model.gaussian_intervals {
        if let FitState::Smoothing(fit) = &fitted.state {
            crate::series::validate_levels(&request.levels)?;
            for &level in &request.levels {
                let widths = smoothing::gaussian_half_widths(fit, request.horizon, level);
                let lo: Vec<f64> = result.mean.iter().zip(&widths).map(|(m, w)| m - w).collect();
                let hi: Vec<f64> = result.mean.iter().zip(&widths).map(|(m, w)| m + w).collect();
                result.intervals.insert(level_key("lo", level), lo);
                result.intervals.insert(level_key("hi", level), hi);
            }
            return Ok(result);
        }
    }

    Err(Error::Config(format!(
        "levels requested but model {} has no interval mechanism; attach a conformal configuration",
        fitted.model.spec.name()
    )))
}

/// Fit-plus-predict in one call; the caller's model value is not mutated.
pub fn forecast(model: &Model, series: &TimeSeries, request: &ForecastRequest) -> Result<ForecastResult> {
    let fitted = fit(model, series)?;
    predict(&fitted, request)
}

/// Re-applies a fitted model to a new history: the learned parameters stay
/// frozen and the state recursion is re-run on `new_series`. Models without
/// learned parameters refit from scratch. The conformity scores from the
/// original fit carry over.
pub fn reapply(fitted: &FittedModel, new_series: &TimeSeries) -> Result<FittedModel> {
    let needed = fitted.model.spec.min_len();
    if new_series.len() < needed {
        return Err(Error::TooShort {
            needed,
            got: new_series.len(),
        });
    }
    let state = match &fitted.state {
        FitState::Smoothing(fit) => {
            let init = smoothing::initial_state(fit.kind, &new_series.values, fit.season_length, fit.phi)?;
            let params: Vec<f64> = {
                let mut p = vec![fit.alpha];
                if fit.kind.has_trend() {
                    p.push(fit.beta);
                }
                if fit.kind.is_seasonal() && !init.gamma_frozen {
                    p.push(fit.gamma);
                }
                p
            };
            FitState::Smoothing(smoothing::replay(
                fit.kind,
                &init,
                &params,
                &new_series.values,
                fit.season_length,
                fit.phi,
            )?)
        }
        FitState::Theta(fit) => FitState::Theta(theta::refit_theta(
            &new_series.values,
            fit.season_length,
            fit.alpha,
        )?),
        FitState::Garch(fit) => FitState::Garch(garch::reapply_garch(fit, &new_series.values)?),
        FitState::Baseline(_) | FitState::Intermittent { .. } => {
            fit_state(&fitted.model.spec, &new_series.values)?
        }
    };
    Ok(FittedModel {
        model: fitted.model.clone(),
        state,
        conformity: fitted.conformity.clone(),
    })
}

/// Forecasts a new history reusing a previously fitted model: [`reapply`]
/// composed with [`predict`]. For models with no learned parameters this
/// equals [`forecast`] on the new history.
pub fn forward(
    fitted: &FittedModel,
    new_series: &TimeSeries,
    request: &ForecastRequest,
) -> Result<ForecastResult> {
    let reapplied = reapply(fitted, new_series)?;
    predict(&reapplied, request)
}
