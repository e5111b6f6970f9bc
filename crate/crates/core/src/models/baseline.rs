//! Baseline forecasters: last-value, seasonal repetition, averages, and
//! random walk with drift.

use crate::error::{Error, Result};

/// State a fitted baseline needs to forecast.
#[derive(Debug, Clone, PartialEq)]
pub enum BaselineFit {
    /// Repeats the last observation.
    Naive { last: f64 },
    /// Repeats the final season.
    SeasonalNaive { last_season: Vec<f64> },
    /// Repeats the mean of the whole history.
    HistoricAverage { mean: f64 },
    /// Repeats the mean of the last `window` observations.
    WindowAverage { mean: f64 },
    /// Per seasonal position, the mean over the last `window` cycles.
    SeasonalWindowAverage { means: Vec<f64> },
    /// Extends the line through the first and last observation.
    Drift { last: f64, slope: f64 },
}

pub fn fit_naive(values: &[f64]) -> Result<BaselineFit> {
    let last = *values.last().ok_or(Error::EmptyInput)?;
    Ok(BaselineFit::Naive { last })
}

pub fn fit_seasonal_naive(values: &[f64], season_length: usize) -> Result<BaselineFit> {
    check_len(values, season_length)?;
    let last_season = values[values.len() - season_length..].to_vec();
    Ok(BaselineFit::SeasonalNaive { last_season })
}

pub fn fit_historic_average(values: &[f64]) -> Result<BaselineFit> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(BaselineFit::HistoricAverage {
        mean: values.iter().sum::<f64>() / values.len() as f64,
    })
}

pub fn fit_window_average(values: &[f64], window: usize) -> Result<BaselineFit> {
    check_len(values, window)?;
    let tail = &values[values.len() - window..];
    Ok(BaselineFit::WindowAverage {
        mean: tail.iter().sum::<f64>() / window as f64,
    })
}

pub fn fit_seasonal_window_average(
    values: &[f64],
    season_length: usize,
    window: usize,
) -> Result<BaselineFit> {
    check_len(values, season_length * window)?;
    // Mean over the last `window` observations at each seasonal offset,
    // with offsets aligned so position 0 forecasts step T+1.
    let t = values.len();
    let means = (0..season_length)
        .map(|offset| {
            let sum: f64 = (0..window)
                .map(|c| values[t - season_length * (c + 1) + offset])
                .sum();
            sum / window as f64
        })
        .collect();
    Ok(BaselineFit::SeasonalWindowAverage { means })
}

pub fn fit_drift(values: &[f64]) -> Result<BaselineFit> {
    check_len(values, 2)?;
    let last = values[values.len() - 1];
    let slope = (last - values[0]) / (values.len() - 1) as f64;
    Ok(BaselineFit::Drift { last, slope })
}

pub fn predict_baseline(fit: &BaselineFit, horizon: usize) -> Vec<f64> {
    match fit {
        BaselineFit::Naive { last } => vec![*last; horizon],
        BaselineFit::SeasonalNaive { last_season } => (0..horizon)
            .map(|k| last_season[k % last_season.len()])
            .collect(),
        BaselineFit::HistoricAverage { mean } | BaselineFit::WindowAverage { mean } => {
            vec![*mean; horizon]
        }
        BaselineFit::SeasonalWindowAverage { means } => {
            (0..horizon).map(|k| means[k % means.len()]).collect()
        }
        BaselineFit::Drift { last, slope } => (1..=horizon)
            .map(|k| last + k as f64 * slope)
            .collect(),
    }
}

fn check_len(values: &[f64], needed: usize) -> Result<()> {
    if values.len() < needed {
        return Err(Error::TooShort {
            needed,
            got: values.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn naive_repeats_last() {
        let fit = fit_naive(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(predict_baseline(&fit, 2), vec![3.0, 3.0]);
    }

    #[test]
    fn seasonal_naive_repeats_season() {
        let fit = fit_seasonal_naive(&[1.0, 2.0, 3.0, 4.0], 2).unwrap();
        assert_eq!(predict_baseline(&fit, 3), vec![3.0, 4.0, 3.0]);
    }

    #[test]
    fn historic_average_is_mean() {
        let fit = fit_historic_average(&[2.0, 4.0, 6.0]).unwrap();
        assert_eq!(predict_baseline(&fit, 2), vec![4.0, 4.0]);
    }

    #[test]
    fn window_average_means_last_window() {
        let fit = fit_window_average(&[1.0, 2.0, 3.0, 4.0], 2).unwrap();
        assert_eq!(predict_baseline(&fit, 2), vec![3.5, 3.5]);
    }

    #[test]
    fn seasonal_window_average_example() {
        // season 2, window 2 over [1,2,3,4]: offsets average {1,3} and {2,4}.
        let fit = fit_seasonal_window_average(&[1.0, 2.0, 3.0, 4.0], 2, 2).unwrap();
        assert_eq!(predict_baseline(&fit, 4), vec![2.0, 3.0, 2.0, 3.0]);
    }

    #[test]
    fn drift_extends_endpoint_line() {
        let fit = fit_drift(&[1.0, 2.0, 6.0]).unwrap();
        // slope (6-1)/2 = 2.5
        assert_eq!(predict_baseline(&fit, 2), vec![8.5, 11.0]);
    }

    #[test]
    fn minimum_lengths_enforced() {
        assert!(fit_drift(&[1.0]).is_err());
        assert!(fit_window_average(&[1.0], 2).is_err());
        assert!(fit_seasonal_naive(&[1.0], 2).is_err());
        assert!(fit_seasonal_window_average(&[1.0, 2.0, 3.0], 2, 2).is_err());
    }

    #[test]
    fn closed_forms_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..500 {
            let season = rng.gen_range(1..5usize);
            let window = rng.gen_range(1..4usize);
            let n = rng.gen_range(season * window + 2..40);
            let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
            let horizon = rng.gen_range(1..10usize);

            // Brute-force definitions written independently of the fit code.
            let naive = vec![values[n - 1]; horizon];
            assert_eq!(
                predict_baseline(&fit_naive(&values).unwrap(), horizon),
                naive
            );

            let mean = values.iter().sum::<f64>() / n as f64;
            for v in predict_baseline(&fit_historic_average(&values).unwrap(), horizon) {
                assert!((v - mean).abs() <= 1e-12);
            }

            let wmean =
                values[n - window..].iter().sum::<f64>() / window as f64;
            for v in predict_baseline(&fit_window_average(&values, window).unwrap(), horizon) {
                assert!((v - wmean).abs() <= 1e-12);
            }

            let snaive: Vec<f64> = (0..horizon)
                .map(|k| values[n - season + (k % season)])
                .collect();
            assert_eq!(
                predict_baseline(&fit_seasonal_naive(&values, season).unwrap(), horizon),
                snaive
            );

            let swa: Vec<f64> = (0..horizon)
                .map(|k| {
                    let offset = k % season;
                    let mut sum = 0.0;
                    for c in 0..window {
                        sum += values[n - season * (c + 1) + offset];
                    }
                    sum / window as f64
                })
                .collect();
            let got = predict_baseline(
                &fit_seasonal_window_average(&values, season, window).unwrap(),
                horizon,
            );
            for (a, b) in got.iter().zip(&swa) {
                assert!((a - b).abs() <= 1e-12);
            }

            let slope = (values[n - 1] - values[0]) / (n - 1) as f64;
            let drift: Vec<f64> = (1..=horizon)
                .map(|k| values[n - 1] + k as f64 * slope)
                .collect();
            let got = predict_baseline(&fit_drift(&values).unwrap(), horizon);
            for (a, b) in got.iter().zip(&drift) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
