//! Distribution-free prediction intervals from walk-forward calibration.
//!
//! The series is partitioned, working backwards from the end, into K
//! non-overlapping calibration blocks of h steps each. For every block the
//! model is fitted on all preceding observations and the signed h-step
//! residuals are recorded, yielding a K x h conformity score matrix. Interval
//! construction at forecast step k then takes empirical quantiles of a
//! plausible set built from column k: the symmetric method perturbs the point
//! forecast by +/- |score| (2K values), the signed method by the raw scores
//! (K values), preserving bias direction.

use crate::error::{Error, Result};
use crate::fold;
use crate::models::{self, Model};
use crate::series::{level_key, ForecastRequest, ForecastResult, TimeSeries};
use std::str::FromStr;

/// How conformity scores map to interval bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConformalMethod {
    /// Quantiles of `point +/- |score|`; intervals symmetric about the mean.
    Symmetric,
    /// Quantiles of `point + score`; intervals keep the error direction.
    Signed,
}

impl FromStr for ConformalMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "symmetric" => Ok(ConformalMethod::Symmetric),
            "signed" => Ok(ConformalMethod::Signed),
            other => Err(Error::InvalidInput(format!(
                "unknown conformal method '{other}', expected symmetric or signed"
            ))),
        }
    }
}

/// Calibration setup: number of windows, calibration horizon, method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConformalConfig {
    pub n_windows: usize,
    pub horizon: usize,
    pub method: ConformalMethod,
}

impl ConformalConfig {
    pub fn new(n_windows: usize, horizon: usize, method: ConformalMethod) -> Result<Self> {
        if n_windows < 2 {
            return Err(Error::InvalidInput(
                "conformal calibration needs at least 2 windows".into(),
            ));
        }
        if horizon == 0 {
            return Err(Error::InvalidInput(
                "conformal horizon must be at least 1".into(),
            ));
        }
        Ok(ConformalConfig {
            n_windows,
            horizon,
            method,
        })
    }
}

/// K x h signed residuals from the calibration windows.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformityMatrix {
    scores: Vec<Vec<f64>>,
}

impl ConformityMatrix {
    pub fn new(scores: Vec<Vec<f64>>) -> Result<Self> {
        let width = scores.first().map(|r| r.len()).unwrap_or(0);
        if scores.is_empty() || width == 0 {
            return Err(Error::EmptyInput);
        }
        for (w, row) in scores.iter().enumerate() {
            if row.len() != width {
                return Err(Error::InvalidInput(format!(
                    "conformity row {w} has {} entries, expected {width}",
                    row.len()
                )));
            }
            if let Some(i) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteData { index: w * width + i });
            }
        }
        Ok(ConformityMatrix { scores })
    }

    pub fn n_windows(&self) -> usize {
        self.scores.len()
    }

    pub fn horizon(&self) -> usize {
        self.scores[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.scores
    }

    /// Scores for forecast step k (1-based column).
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.scores.iter().map(|row| row[k - 1]).collect()
    }
}

/// Training-cut indices `t_w = T - (K + 1 - w) * h` for w = 1..K. Window w
/// trains on the first `t_w` observations and calibrates on the next h.
pub fn partition_windows(series_len: usize, n_windows: usize, horizon: usize) -> Result<Vec<usize>> {
    if n_windows == 0 || horizon == 0 {
        return Err(Error::InvalidInput(
            "need at least one window and a positive horizon".into(),
        ));
    }
    if series_len <= n_windows * horizon {
        return Err(Error::InsufficientHistory {
            len: series_len,
            windows: n_windows,
            horizon,
        });
    }
    Ok((1..=n_windows)
        .map(|w| series_len - (n_windows + 1 - w) * horizon)
        .collect())
}

/// Walk-forward conformity scores: for each window, fit the model on the
/// growing training prefix, forecast h steps, and record the signed
/// residuals. Windows are independent and evaluated with a batched map.
/// When the series carries exogenous data, each window passes its in-sample
/// rows as training regressors and the following h rows as future ones.
pub fn conformity_scores(
    model: &Model,
    series: &TimeSeries,
    config: &ConformalConfig,
) -> Result<ConformityMatrix> {
    let cuts = partition_windows(series.len(), config.n_windows, config.horizon)?;
    let bare = model.without_conformal();
    let h = config.horizon;

    let rows = fold::try_batch_map(
        |&cut: &usize| -> Result<Vec<f64>> {
            let train = series.values[..cut].to_vec();
            let prefix = match &series.exog {
                Some(exog) => TimeSeries::with_exog(series.id.clone(), train, exog[..cut].to_vec())?,
                None => TimeSeries::new(series.id.clone(), train)?,
            };
            let mut request = ForecastRequest::new(h)?;
            if let Some(exog) = &series.exog {
                if exog.len() >= cut + h {
                    request.exog_future = Some(exog[cut..cut + h].to_vec());
                }
            }
            let forecast = models::forecast(&bare, &prefix, &request)?;
            Ok((0..h)
                .map(|k| series.values[cut + k] - forecast.mean[k])
                .collect())
        },
        &cuts,
    )
    .map_err(|e| match e {
        Error::BatchElement { index, source } => Error::WindowFit {
            window: index + 1,
            source,
        },
        other => other,
    })?;

    ConformityMatrix::new(rows)
}

/// Linear-interpolation quantile of a sorted sample: index `p * (n - 1)`,
/// interpolated between the bracketing order statistics.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let g = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let j = g.floor() as usize;
    let f = g - j as f64;
    if j + 1 >= n {
        sorted[n - 1]
    } else {
        (1.0 - f) * sorted[j] + f * sorted[j + 1]
    }
}

fn check_interval_inputs(scores_k: &[f64], level: f64) -> Result<()> {
    if scores_k.len() < 2 {
        return Err(Error::InvalidInput(
            "interval construction needs at least 2 scores".into(),
        ));
    }
    if !(level > 0.0 && level < 100.0) {
        return Err(Error::InvalidInput(format!(
            "level {level} outside the open interval (0, 100)"
        )));
    }
    Ok(())
}

/// Symmetric interval at one step: quantiles of the 2K-element plausible set
/// `{point +/- |score|}`. Computed as `point -/+ w` with a single half-width
/// `w`, so the bounds are mirror images of each other around the point.
pub fn symmetric_interval(point: f64, scores_k: &[f64], level: f64) -> Result<(f64, f64)> {
    check_interval_inputs(scores_k, level)?;
    let alpha = 1.0 - level / 100.0;
    let mut offsets: Vec<f64> = Vec::with_capacity(2 * scores_k.len());
    for &s in scores_k {
        offsets.push(s.abs());
        offsets.push(-s.abs());
    }
    offsets.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    let w = quantile_sorted(&offsets, 1.0 - alpha / 2.0);
    Ok((point - w, point + w))
}

/// Signed interval at one step: quantiles of the K-element plausible set
/// `{point + score}`, preserving any systematic bias direction.
pub fn signed_interval(point: f64, scores_k: &[f64], level: f64) -> Result<(f64, f64)> {
    check_interval_inputs(scores_k, level)?;
    let alpha = 1.0 - level / 100.0;
    let mut plausible: Vec<f64> = scores_k.iter().map(|&s| point + s).collect();
    plausible.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    Ok((
        quantile_sorted(&plausible, alpha / 2.0),
        quantile_sorted(&plausible, 1.0 - alpha / 2.0),
    ))
}

/// The highest coverage level (in percent) the score set can still resolve:
/// each of the 2K symmetric (K signed) plausible values carries tail mass
/// 1/K (2/K), so levels above `100 * (1 - 1/K)` (`100 * (1 - 2/K)`) exceed
/// the empirical distribution's resolution.
pub fn max_resolvable_level(n_windows: usize, method: ConformalMethod) -> f64 {
    match method {
        ConformalMethod::Symmetric => 100.0 * (1.0 - 1.0 / n_windows as f64),
        ConformalMethod::Signed => 100.0 * (1.0 - 2.0 / n_windows as f64),
    }
}

/// Adds `lo-{level}` / `hi-{level}` bands to a forecast, applying the method
/// column-by-column. The mean is left untouched. A level beyond the score
/// set's resolution still emits the extreme-order-statistic interval but
/// records a warning on the result.
pub fn add_confidence_intervals(
    mut result: ForecastResult,
    scores: &ConformityMatrix,
    levels: &[f64],
    method: ConformalMethod,
) -> Result<ForecastResult> {
    crate::series::validate_levels(levels)?;
    if scores.horizon() < result.mean.len() {
        return Err(Error::Config(format!(
            "conformity matrix covers {} steps but the forecast has {}",
            scores.horizon(),
            result.mean.len()
        )));
    }
    for &level in levels {
        let ceiling = max_resolvable_level(scores.n_windows(), method);
        if level > ceiling {
            result.warnings.push(format!(
                "level {level} exceeds the ~{ceiling:.1} resolvable by {} {} scores; emitting extreme order statistics",
                scores.n_windows(),
                match method {
                    ConformalMethod::Symmetric => "symmetric",
                    ConformalMethod::Signed => "signed",
                }
            ));
        }
        let mut lo = Vec::with_capacity(result.mean.len());
        let mut hi = Vec::with_capacity(result.mean.len());
        for (k, &point) in result.mean.iter().enumerate() {
            let column = scores.column(k + 1);
            let (l, h) = match method {
                ConformalMethod::Symmetric => symmetric_interval(point, &column, level)?,
                ConformalMethod::Signed => signed_interval(point, &column, level)?,
            };
            lo.push(l);
            hi.push(h);
        }
        result.intervals.insert(level_key("lo", level), lo);
        result.intervals.insert(level_key("hi", level), hi);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelSpec;

    #[test]
    fn partition_matches_worked_example() {
        assert_eq!(partition_windows(14, 3, 4).unwrap(), vec![2, 6, 10]);
    }

    #[test]
    fn partition_single_window() {
        assert_eq!(partition_windows(2, 1, 1).unwrap(), vec![1]);
    }

    #[test]
    fn partition_formula() {
        assert_eq!(
            partition_windows(100, 5, 10).unwrap(),
            vec![50, 60, 70, 80, 90]
        );
    }

    #[test]
    fn partition_rejects_insufficient_history() {
        assert!(matches!(
            partition_windows(12, 3, 4),
            Err(Error::InsufficientHistory { .. })
        ));
    }

    #[test]
    fn scores_are_zero_for_a_perfect_model() {
        // A constant series is forecast exactly by the naive model.
        let series = TimeSeries::new("s", vec![5.0; 10]).unwrap();
        let config = ConformalConfig::new(3, 2, ConformalMethod::Symmetric).unwrap();
        let m = conformity_scores(&Model::new(ModelSpec::Naive), &series, &config).unwrap();
        assert_eq!(m.n_windows(), 3);
        assert_eq!(m.horizon(), 2);
        for row in m.rows() {
            for &s in row {
                assert_eq!(s, 0.0);
            }
        }
    }

    #[test]
    fn naive_scores_hand_example() {
        let series = TimeSeries::new("s", vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let config = ConformalConfig::new(2, 1, ConformalMethod::Symmetric).unwrap();
        let m = conformity_scores(&Model::new(ModelSpec::Naive), &series, &config).unwrap();
        assert_eq!(m.rows(), &[vec![1.0], vec![1.0]]);
    }

    #[test]
    fn batched_scores_equal_sequential_windows() {
        let series =
            TimeSeries::new("s", (1..=20).map(|t| (t as f64).sin() * 3.0 + 10.0).collect())
                .unwrap();
        let config = ConformalConfig::new(4, 2, ConformalMethod::Signed).unwrap();
        let model = Model::new(ModelSpec::Naive);
        let batched = conformity_scores(&model, &series, &config).unwrap();

        // Sequential oracle over the same cuts.
        let cuts = partition_windows(series.len(), 4, 2).unwrap();
        for (w, &cut) in cuts.iter().enumerate() {
            let prefix = TimeSeries::new("s", series.values[..cut].to_vec()).unwrap();
            let f = models::forecast(&model, &prefix, &ForecastRequest::new(2).unwrap()).unwrap();
            for k in 0..2 {
                let expect = series.values[cut + k] - f.mean[k];
                assert_eq!(batched.rows()[w][k], expect);
            }
        }
    }

    #[test]
    fn exogenous_rows_thread_through_the_windows() {
        // In-scope models ignore regressors; the exogenous plumbing must
        // still slice training and future rows per window without error.
        let values: Vec<f64> = (1..=12).map(|t| t as f64).collect();
        let exog: Vec<Vec<f64>> = (1..=12).map(|t| vec![t as f64 * 0.1, 1.0]).collect();
        let series = TimeSeries::with_exog("x", values, exog).unwrap();
        let config = ConformalConfig::new(3, 2, ConformalMethod::Symmetric).unwrap();
        let with_exog = conformity_scores(&Model::new(ModelSpec::Naive), &series, &config).unwrap();

        let plain = TimeSeries::new("x", series.values.clone()).unwrap();
        let without =
            conformity_scores(&Model::new(ModelSpec::Naive), &plain, &config).unwrap();
        assert_eq!(with_exog, without);
    }

    #[test]
    fn window_failure_carries_the_index() {
        // First window trains on 2 points, below the GARCH minimum.
        let series = TimeSeries::new("s", (1..=14).map(|t| t as f64).collect()).unwrap();
        let config = ConformalConfig::new(3, 4, ConformalMethod::Symmetric).unwrap();
        let r = conformity_scores(&Model::new(ModelSpec::Garch), &series, &config);
        match r {
            Err(Error::WindowFit { window, .. }) => assert_eq!(window, 1),
            other => panic!("expected window-fit error, got {other:?}"),
        }
    }

    #[test]
    fn symmetric_interval_degenerate_scores() {
        let (lo, hi) = symmetric_interval(7.0, &[0.0, 0.0, 0.0], 80.0).unwrap();
        assert_eq!((lo, hi), (7.0, 7.0));
    }

    #[test]
    fn symmetric_interval_quantile_example() {
        // |scores| {1, 2} at level 50: plausible set {8, 9, 11, 12},
        // interpolated quartiles (8.75, 11.25).
        let (lo, hi) = symmetric_interval(10.0, &[1.0, -2.0], 50.0).unwrap();
        assert!((lo - 8.75).abs() <= 1e-12);
        assert!((hi - 11.25).abs() <= 1e-12);
    }

    #[test]
    fn symmetric_interval_mirrors_the_point() {
        let (lo, hi) = symmetric_interval(10.0, &[1.5, -0.5, 2.5], 80.0).unwrap();
        assert_eq!(10.0 - lo, hi - 10.0);
    }

    #[test]
    fn signed_interval_point_mass() {
        let (lo, hi) = signed_interval(10.0, &[3.0, 3.0, 3.0], 80.0).unwrap();
        assert_eq!((lo, hi), (13.0, 13.0));
    }

    #[test]
    fn signed_interval_preserves_bias() {
        let (lo, _hi) = signed_interval(10.0, &[1.0, 2.0, 3.0], 50.0).unwrap();
        assert!(lo > 10.0);
    }

    #[test]
    fn signed_interval_two_point_example() {
        // scores {-1, 3} at level 50: plausible {9, 13}, quartiles (10, 12).
        let (lo, hi) = signed_interval(10.0, &[-1.0, 3.0], 50.0).unwrap();
        assert!((lo - 10.0).abs() <= 1e-12);
        assert!((hi - 12.0).abs() <= 1e-12);
    }

    #[test]
    fn zero_matrix_collapses_to_the_mean() {
        // 10 windows keep level 80 under the symmetric resolution ceiling.
        let scores = ConformityMatrix::new(vec![vec![0.0; 2]; 10]).unwrap();
        let result = ForecastResult::from_mean(vec![3.0, 4.0]);
        let with = add_confidence_intervals(
            result,
            &scores,
            &[80.0],
            ConformalMethod::Symmetric,
        )
        .unwrap();
        let (lo, hi) = with.interval(80.0).unwrap();
        assert_eq!(lo, with.mean.as_slice());
        assert_eq!(hi, with.mean.as_slice());
        assert!(with.warnings.is_empty());
    }

    #[test]
    fn resolution_ceilings() {
        assert!((max_resolvable_level(100, ConformalMethod::Symmetric) - 99.0).abs() < 1e-12);
        assert!((max_resolvable_level(100, ConformalMethod::Signed) - 98.0).abs() < 1e-12);
    }

    #[test]
    fn unresolvable_level_warns_but_emits() {
        let scores = ConformityMatrix::new(vec![vec![1.0], vec![-2.0], vec![0.5], vec![1.5]]).unwrap();
        // K = 4: symmetric ceiling 75, signed ceiling 50.
        let sym = add_confidence_intervals(
            ForecastResult::from_mean(vec![0.0]),
            &scores,
            &[80.0],
            ConformalMethod::Symmetric,
        )
        .unwrap();
        assert_eq!(sym.warnings.len(), 1);
        assert!(sym.interval(80.0).is_some());

        let signed = add_confidence_intervals(
            ForecastResult::from_mean(vec![0.0]),
            &scores,
            &[60.0],
            ConformalMethod::Signed,
        )
        .unwrap();
        assert_eq!(signed.warnings.len(), 1);

        let fine = add_confidence_intervals(
            ForecastResult::from_mean(vec![0.0]),
            &scores,
            &[50.0],
            ConformalMethod::Symmetric,
        )
        .unwrap();
        assert!(fine.warnings.is_empty());
    }

    #[test]
    fn intervals_nest_across_levels() {
        let scores = ConformityMatrix::new(vec![
            vec![1.0, -0.5],
            vec![-2.0, 1.5],
            vec![0.7, 0.2],
            vec![-1.2, -0.4],
            vec![2.2, 0.9],
        ])
        .unwrap();
        for method in [ConformalMethod::Symmetric, ConformalMethod::Signed] {
            let r = add_confidence_intervals(
                ForecastResult::from_mean(vec![10.0, 11.0]),
                &scores,
                &[50.0, 80.0],
                method,
            )
            .unwrap();
            let (lo50, hi50) = r.interval(50.0).unwrap();
            let (lo80, hi80) = r.interval(80.0).unwrap();
            for k in 0..2 {
                assert!(lo80[k] <= lo50[k]);
                assert!(hi80[k] >= hi50[k]);
            }
        }
    }
}
