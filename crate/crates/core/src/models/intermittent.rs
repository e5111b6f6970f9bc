//! Intermittent-demand forecasters: Croston's classic method, TSB, and the
//! ADIDA / IMAPA aggregation schemes, in their standard textbook forms.
//!
//! All four produce flat forecasts over the horizon. The recursions are
//! simple-exponential-smoothing folds over derived subsequences (demand
//! sizes, inter-demand gaps, occurrence indicators, or block aggregates).

use crate::error::{Error, Result};
use crate::fold;

/// Default smoothing weight for Croston, ADIDA and IMAPA.
pub const DEFAULT_ALPHA: f64 = 0.1;
/// Default smoothing weights (demand, probability) for TSB.
pub const DEFAULT_TSB_ALPHA: (f64, f64) = (0.2, 0.2);

/// SES level after folding `values` with weight `alpha`, initialized at the
/// first element.
fn ses_level(values: &[f64], alpha: f64) -> f64 {
    let init = values[0];
    if values.len() == 1 {
        return init;
    }
    fold::scan(
        |l: f64, x: f64| (alpha * x + (1.0 - alpha) * l, ()),
        init,
        &values[1..],
    )
    .expect("non-empty tail")
    .final_carry
}

/// Nonzero demand sizes and the gaps between consecutive demands.
///
/// Gaps are differences of the 1-based demand positions; a series with a
/// single demand falls back to that demand's position as its only gap.
fn demand_profile(series: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut sizes = Vec::new();
    let mut gaps = Vec::new();
    let mut last_position: Option<usize> = None;
    for (i, &v) in series.iter().enumerate() {
        if v > 0.0 {
            sizes.push(v);
            if let Some(prev) = last_position {
                gaps.push((i - prev) as f64);
            }
            last_position = Some(i);
        }
    }
    if gaps.is_empty() {
        if let Some(only) = last_position {
            gaps.push((only + 1) as f64);
        }
    }
    (sizes, gaps)
}

fn check_nonnegative(series: &[f64]) -> Result<()> {
    if series.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some((index, _)) = series.iter().enumerate().find(|(_, &v)| v < 0.0) {
        return Err(Error::InvalidInput(format!(
            "intermittent-demand series must be nonnegative (index {index})"
        )));
    }
    Ok(())
}

/// Croston's classic method: SES over demand sizes and over inter-demand
/// gaps; the flat forecast is their ratio. An all-zero series forecasts zero.
pub fn croston_forecast(series: &[f64], horizon: usize, alpha: f64) -> Result<Vec<f64>> {
    check_nonnegative(series)?;
    let (sizes, gaps) = demand_profile(series);
    if sizes.is_empty() {
        return Ok(vec![0.0; horizon]);
    }
    let z = ses_level(&sizes, alpha);
    let p = ses_level(&gaps, alpha);
    Ok(vec![z / p; horizon])
}

/// TSB: SES over demand sizes (updated only on demand periods) and SES over
/// the demand-occurrence indicator (updated every period); the flat forecast
/// is `probability * size`.
pub fn tsb_forecast(
    series: &[f64],
    horizon: usize,
    alpha_demand: f64,
    alpha_probability: f64,
) -> Result<Vec<f64>> {
    check_nonnegative(series)?;
    let (count, total) = series
        .iter()
        .filter(|&&v| v > 0.0)
        .fold((0usize, 0.0), |(c, t), &v| (c + 1, t + v));
    let z0 = if count == 0 { 0.0 } else { total / count as f64 };
    let p0 = count as f64 / series.len() as f64;
    let (z, p) = tsb_levels(series, alpha_demand, alpha_probability, z0, p0);
    Ok(vec![p * z; horizon])
}

/// The TSB recursion from explicit initial levels; exposed for tests that
/// pin the decay behavior from a chosen starting state.
pub(crate) fn tsb_levels(
    series: &[f64],
    alpha_demand: f64,
    alpha_probability: f64,
    z0: f64,
    p0: f64,
) -> (f64, f64) {
    let scanned = fold::scan(
        |(z, p): (f64, f64), y: f64| {
            let occurred = if y > 0.0 { 1.0 } else { 0.0 };
            let p2 = alpha_probability * occurred + (1.0 - alpha_probability) * p;
            let z2 = if y > 0.0 {
                alpha_demand * y + (1.0 - alpha_demand) * z
            } else {
                z
            };
            ((z2, p2), z2 * p2)
        },
        (z0, p0),
        series,
    )
    .expect("series validated non-empty");
    scanned.final_carry
}

/// ADIDA: aggregate into non-overlapping blocks (dropping the oldest
/// remainder), smooth the aggregates with SES, and disaggregate uniformly.
/// The default block size is the mean inter-demand gap rounded up.
pub fn adida_forecast(series: &[f64], horizon: usize, block_size: Option<usize>) -> Result<Vec<f64>> {
    check_nonnegative(series)?;
    let (sizes, gaps) = demand_profile(series);
    if sizes.is_empty() {
        return Ok(vec![0.0; horizon]);
    }
    let block = match block_size {
        Some(0) => {
            return Err(Error::InvalidInput("aggregation block size must be at least 1".into()))
        }
        Some(b) => b.min(series.len()),
        None => {
            let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
            (mean_gap.ceil() as usize).clamp(1, series.len())
        }
    };
    let n_blocks = series.len() / block;
    let start = series.len() - n_blocks * block;
    let aggregates: Vec<f64> = (0..n_blocks)
        .map(|b| series[start + b * block..start + (b + 1) * block].iter().sum())
        .collect();
    let level = ses_level(&aggregates, DEFAULT_ALPHA);
    Ok(vec![level / block as f64; horizon])
}

/// IMAPA: average the ADIDA forecasts across several aggregation levels.
/// The default levels are `1..=round(mean inter-demand gap)`.
pub fn imapa_forecast(
    series: &[f64],
    horizon: usize,
    levels: Option<&[usize]>,
) -> Result<Vec<f64>> {
    check_nonnegative(series)?;
    let (sizes, gaps) = demand_profile(series);
    if sizes.is_empty() {
        return Ok(vec![0.0; horizon]);
    }
    let default_levels: Vec<usize>;
    let levels = match levels {
        Some(l) if !l.is_empty() => l,
        Some(_) => return Err(Error::InvalidInput("IMAPA needs at least one aggregation level".into())),
        None => {
            let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
            let max_level = (mean_gap.round() as usize).clamp(1, series.len());
            default_levels = (1..=max_level).collect();
            &default_levels
        }
    };
    let mut acc = vec![0.0; horizon];
    for &level in levels {
        let f = adida_forecast(series, horizon, Some(level))?;
        for (a, v) in acc.iter_mut().zip(f) {
            *a += v;
        }
    }
    for a in &mut acc {
        *a /= levels.len() as f64;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn croston_regular_pattern() {
        // Demands of 4 every 2 periods; with alpha near zero both SES levels
        // stay at their initial values 4 and 2.
        let series = [0.0, 0.0, 4.0, 0.0, 4.0, 0.0, 4.0];
        let f = croston_forecast(&series, 3, 0.0001).unwrap();
        for v in &f {
            assert!((v - 2.0).abs() <= 1e-9, "got {v}");
        }
    }

    #[test]
    fn croston_all_zero_forecasts_zero() {
        let f = croston_forecast(&[0.0, 0.0, 0.0], 4, 0.1).unwrap();
        assert_eq!(f, vec![0.0; 4]);
    }

    #[test]
    fn croston_single_event() {
        // One demand of 5 at position 2: size level 5, gap level 2.
        let f = croston_forecast(&[0.0, 5.0, 0.0], 2, 0.1).unwrap();
        assert_eq!(f, vec![2.5, 2.5]);
    }

    #[test]
    fn croston_rejects_negative_demand() {
        assert!(croston_forecast(&[1.0, -2.0], 1, 0.1).is_err());
    }

    #[test]
    fn tsb_always_demand_keeps_probability_one() {
        let f = tsb_forecast(&[3.0, 3.0, 3.0], 3, 0.2, 0.2).unwrap();
        for v in &f {
            assert!((v - 3.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn tsb_probability_decays_without_demand() {
        let series = vec![0.0; 10];
        let (z0, p0) = (4.0, 0.6);
        let (z, p) = tsb_levels(&series, 0.2, 0.2, z0, p0);
        assert!(p < p0);
        assert!(p > 0.0);
        assert!(z * p < z0 * p0);
    }

    #[test]
    fn tsb_alternating_matches_hand_trace() {
        // [0,6,0,6] with both weights 0.5, z0 = 6, p0 = 0.5; stepped by hand.
        let series = [0.0, 6.0, 0.0, 6.0];
        let mut z = 6.0;
        let mut p = 0.5;
        for &y in &series {
            p = 0.5 * (if y > 0.0 { 1.0 } else { 0.0 }) + 0.5 * p;
            if y > 0.0 {
                z = 0.5 * y + 0.5 * z;
            }
        }
        let f = tsb_forecast(&series, 2, 0.5, 0.5).unwrap();
        assert!((f[0] - z * p).abs() <= 1e-12);
        assert_eq!(f[0], f[1]);
    }

    #[test]
    fn adida_level_one_equals_plain_ses() {
        let series = [0.0, 3.0, 0.0, 0.0, 5.0, 2.0];
        let f = adida_forecast(&series, 2, Some(1)).unwrap();
        let expect = ses_level(&series, DEFAULT_ALPHA);
        assert_eq!(f, vec![expect; 2]);
    }

    #[test]
    fn adida_recovers_block_mean() {
        // Blocks of 3 summing to 6 each: aggregate SES stays at 6, so the
        // per-period forecast is the block mean 2.
        let series = [0.0, 0.0, 6.0, 0.0, 0.0, 6.0, 0.0, 0.0, 6.0];
        let f = adida_forecast(&series, 3, Some(3)).unwrap();
        for v in f {
            assert!((v - 2.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn imapa_single_level_equals_adida() {
        let series = [0.0, 3.0, 0.0, 4.0, 0.0, 0.0, 5.0];
        let a = adida_forecast(&series, 4, Some(2)).unwrap();
        let i = imapa_forecast(&series, 4, Some(&[2])).unwrap();
        assert_eq!(a, i);
    }

    #[test]
    fn forecasts_are_flat_over_horizon() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let n = rng.gen_range(4..30);
            let series: Vec<f64> = (0..n)
                .map(|_| {
                    if rng.gen_bool(0.6) {
                        0.0
                    } else {
                        rng.gen_range(1.0..9.0)
                    }
                })
                .collect();
            for f in [
                croston_forecast(&series, 5, 0.1).unwrap(),
                tsb_forecast(&series, 5, 0.2, 0.2).unwrap(),
                adida_forecast(&series, 5, None).unwrap(),
                imapa_forecast(&series, 5, None).unwrap(),
            ] {
                for w in f.windows(2) {
                    assert_eq!(w[0], w[1]);
                }
            }
        }
    }

    #[test]
    fn recursions_match_imperative_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..100 {
            let n = rng.gen_range(3..40);
            let series: Vec<f64> = (0..n)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        0.0
                    } else {
                        rng.gen_range(0.5..20.0)
                    }
                })
                .collect();
            let alpha = rng.gen_range(0.01..0.99);

            // Croston oracle: imperative SES over sizes and gaps.
            let (sizes, gaps) = demand_profile(&series);
            if !sizes.is_empty() {
                let mut z = sizes[0];
                for &s in &sizes[1..] {
                    z = alpha * s + (1.0 - alpha) * z;
                }
                let mut p = gaps[0];
                for &g in &gaps[1..] {
                    p = alpha * g + (1.0 - alpha) * p;
                }
                let f = croston_forecast(&series, 1, alpha).unwrap();
                assert!((f[0] - z / p).abs() <= 1e-12);
            }

            // TSB oracle.
            let nonzero: Vec<f64> = series.iter().copied().filter(|&v| v > 0.0).collect();
            let mut z = if nonzero.is_empty() {
                0.0
            } else {
                nonzero.iter().sum::<f64>() / nonzero.len() as f64
            };
            let mut p = nonzero.len() as f64 / series.len() as f64;
            let (ad, ap) = (rng.gen_range(0.01..0.99), rng.gen_range(0.01..0.99));
            for &y in &series {
                p = ap * (if y > 0.0 { 1.0 } else { 0.0 }) + (1.0 - ap) * p;
                if y > 0.0 {
                    z = ad * y + (1.0 - ad) * z;
                }
            }
            let f = tsb_forecast(&series, 1, ad, ap).unwrap();
            assert!((f[0] - z * p).abs() <= 1e-12);
        }
    }
}
