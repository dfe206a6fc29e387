use thiserror::Error;

use super::runner::RunRecord;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AggregateError {
    #[error("nothing to aggregate")]
    Empty,
    #[error("run {index} has {found} episodes, expected {expected}")]
    LengthMismatch {
        index: usize,
        found: usize,
        expected: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub episode: usize,
    pub mean: f64,
    pub std_error: f64,
    pub runs: usize,
}

/// Per-episode mean and standard error across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    pub points: Vec<CurvePoint>,
}

impl AggregateCurve {
    pub fn means(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Sample mean and standard error of the mean (sample standard deviation with
/// `n - 1`, divided by `sqrt(n)`). A single value has standard error 0.
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Aggregates equally long per-run series episode by episode.
pub fn aggregate_series(series: &[Vec<f64>]) -> Result<AggregateCurve, AggregateError> {
    let first = series.first().ok_or(AggregateError::Empty)?;
    let expected = first.len();
    if let Some((index, s)) = series.iter().enumerate().find(|(_, s)| s.len() != expected) {
        return Err(AggregateError::LengthMismatch {
            index,
            found: s.len(),
            expected,
        });
    }
    let mut column = Vec::with_capacity(series.len());
    let points = (0..expected)
        .map(|episode| {
            column.clear();
            column.extend(series.iter().map(|s| s[episode]));
            let (mean, std_error) = mean_and_std_error(&column);
            CurvePoint {
                episode,
                mean,
                std_error,
                runs: series.len(),
            }
        })
        .collect();
    Ok(AggregateCurve { points })
}

/// Aggregates episode returns.
pub fn aggregate(records: &[RunRecord]) -> Result<AggregateCurve, AggregateError> {
    aggregate_series(&records.iter().map(RunRecord::returns).collect::<Vec<_>>())
}

/// Trailing moving average over the last `window` points (fewer at the start).
/// Means and standard errors are averaged the same way. A window of 0 or 1
/// leaves the curve unchanged.
pub fn smooth(curve: &AggregateCurve, window: usize) -> AggregateCurve {
    let window = window.max(1);
    let points = (0..curve.points.len())
        .map(|i| {
            let slice = &curve.points[(i + 1).saturating_sub(window)..=i];
            let n = slice.len() as f64;
            CurvePoint {
                mean: slice.iter().map(|p| p.mean).sum::<f64>() / n,
                std_error: slice.iter().map(|p| p.std_error).sum::<f64>() / n,
                ..curve.points[i]
            }
        })
        .collect();
    AggregateCurve { points }
}

/// Trailing moving average of a plain series.
pub fn smooth_series(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    (0..values.len())
        .map(|i| {
            let slice = &values[(i + 1).saturating_sub(window)..=i];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn curve(means: &[f64]) -> AggregateCurve {
        AggregateCurve {
            points: means
                .iter()
                .enumerate()
                .map(|(episode, m)| CurvePoint {
                    episode,
                    mean: *m,
                    std_error: 0.0,
                    runs: 1,
                })
                .collect(),
        }
    }

    #[test]
    fn two_runs_hand_arithmetic() {
        let c = aggregate_series(&[vec![-10.0], vec![-8.0]]).unwrap();
        assert_eq!(c.points[0].mean, -9.0);
        assert!((c.points[0].std_error - 1.0).abs() < 1e-15);
        assert_eq!(c.points[0].runs, 2);
    }

    #[test]
    fn single_run_has_zero_error() {
        let c = aggregate_series(&[vec![-3.0, -4.0]]).unwrap();
        assert!(c.points.iter().all(|p| p.std_error == 0.0));
    }

    #[test]
    fn identical_runs_have_zero_error() {
        let run = vec![-12.0, -7.5, -3.25];
        let c = aggregate_series(&vec![run; 5]).unwrap();
        assert!(c.points.iter().all(|p| p.std_error == 0.0));
    }

    #[test]
    fn mismatched_and_empty_inputs() {
        assert_eq!(aggregate_series(&[]).unwrap_err(), AggregateError::Empty);
        assert!(matches!(
            aggregate_series(&[vec![1.0], vec![1.0, 2.0]]),
            Err(AggregateError::LengthMismatch { index: 1, .. })
        ));
    }

    #[test]
    fn smoothing_examples() {
        let c = curve(&[0.0, 10.0]);
        assert_eq!(smooth(&c, 1), c);
        assert_eq!(smooth(&c, 2).means(), vec![0.0, 5.0]);
        let flat = curve(&[3.0; 20]);
        assert_eq!(smooth(&flat, 7), flat);
    }

    proptest! {
        #[test]
        fn smoothing_commutes_with_averaging(
            runs in proptest::collection::vec(proptest::collection::vec(-100.0f64..0.0, 12), 1..6),
            window in 1usize..15,
        ) {
            let aggregated_then_smoothed = smooth(&aggregate_series(&runs).unwrap(), window).means();
            let smoothed_runs: Vec<Vec<f64>> = runs.iter().map(|r| smooth_series(r, window)).collect();
            let smoothed_then_aggregated = aggregate_series(&smoothed_runs).unwrap().means();
            for (a, b) in aggregated_then_smoothed.iter().zip(&smoothed_then_aggregated) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
