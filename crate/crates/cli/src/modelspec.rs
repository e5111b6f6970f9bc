//! Model names and flag wiring for the CLI.

use crate::error::{CliError, Result};
use foldcast_core::models::ModelSpec;

/// Per-invocation model options taken from the command line.
#[derive(Debug, Clone, Copy)]
pub struct ModelOptions {
    pub season_length: usize,
    pub window: usize,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            season_length: 1,
            window: 3,
        }
    }
}

/// Resolves a model name (case-insensitive) into a spec. Unknown names are a
/// usage error; invalid parameter combinations surface later as model errors.
pub fn parse_model(name: &str, opts: &ModelOptions) -> Result<ModelSpec> {
    let spec = match name.to_ascii_lowercase().as_str() {
        "naive" => ModelSpec::Naive,
        "seasonalnaive" | "seasonal_naive" | "snaive" => ModelSpec::SeasonalNaive {
            season_length: opts.season_length,
        },
        "historicaverage" | "historic_average" => ModelSpec::HistoricAverage,
        "windowaverage" | "window_average" => ModelSpec::WindowAverage {
            window: opts.window,
        },
        "seasonalwindowaverage" | "seasonal_window_average" => ModelSpec::SeasonalWindowAverage {
            season_length: opts.season_length,
            window: opts.window,
        },
        "randomwalkwithdrift" | "rwd" | "drift" => ModelSpec::RandomWalkWithDrift,
        "ses" => ModelSpec::Ses,
        "holt" => ModelSpec::Holt { phi: 1.0 },
        "seasonales" | "seasonal_es" => ModelSpec::SeasonalEs {
            season_length: opts.season_length,
        },
        "holtwinters" | "holt_winters" => ModelSpec::holt_winters(opts.season_length),
        "croston" | "crostonclassic" => ModelSpec::Croston { alpha: 0.1 },
        "tsb" => ModelSpec::Tsb {
            alpha_demand: 0.2,
            alpha_probability: 0.2,
        },
        "adida" => ModelSpec::Adida { block_size: None },
        "imapa" => ModelSpec::Imapa { levels: None },
        "theta" => ModelSpec::Theta {
            season_length: opts.season_length,
        },
        "garch" => ModelSpec::Garch,
        other => {
            return Err(CliError::Usage(format!(
                "unknown model '{other}'; known models: {}",
                catalog_names().join(", ")
            )))
        }
    };
    Ok(spec)
}

/// Every model the CLI exposes, in a stable order.
pub fn catalog_names() -> Vec<&'static str> {
    vec![
        "Naive",
        "SeasonalNaive",
        "HistoricAverage",
        "WindowAverage",
        "SeasonalWindowAverage",
        "RandomWalkWithDrift",
        "SES",
        "Holt",
        "SeasonalES",
        "HoltWinters",
        "CrostonClassic",
        "TSB",
        "ADIDA",
        "IMAPA",
        "Theta",
        "GARCH",
    ]
}

/// Expands a `--models` argument: a comma list of names, or `all` for the
/// full catalog (seasonal models are included only when a season length
/// greater than one is in effect).
pub fn parse_model_list(arg: &str, opts: &ModelOptions) -> Result<Vec<ModelSpec>> {
    if arg.trim().eq_ignore_ascii_case("all") {
        let names: Vec<&str> = catalog_names()
            .into_iter()
            .filter(|n| {
                opts.season_length > 1
                    || !matches!(
                        *n,
                        "SeasonalNaive" | "SeasonalWindowAverage" | "SeasonalES" | "HoltWinters"
                    )
            })
            .collect();
        return names.iter().map(|n| parse_model(n, opts)).collect();
    }
    arg.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|n| parse_model(n, opts))
        .collect()
}
