use super::{mape, rmse};
use crate::forecast::{scale_factor, CandidatePool, CandidateRef, ForecastConfig};
use crate::{Error, Result};

/// The best candidate for a known future. Evaluation only: it reads the
/// ground truth by design.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleMatch {
    pub candidate: CandidateRef,
    pub alpha: f64,
    pub forecast: Vec<f64>,
    /// `None` when the ground truth has no positive day.
    pub mape: Option<f64>,
    pub rmse: f64,
}

/// Picks the candidate of `pool` whose (scaled, as configured) continuation
/// has the lowest MAPE against `truth`; ties go to the lower RMSE, then uri
/// and shift. The pool must have been built with horizon `truth.len()`.
pub fn oracle_match(
    truth: &[f64],
    history: &[f64],
    pool: &CandidatePool,
    config: &ForecastConfig,
) -> Result<OracleMatch> {
    let history_last = *history
        .last()
        .ok_or_else(|| Error::EmptyInput("history window".into()))?;
    let mut best: Option<OracleMatch> = None;
    for candidate in pool.iter() {
        let window = pool.window_of(&candidate).expect("candidate from pool");
        let future = pool.future_of(&candidate).expect("candidate from pool");
        let alpha = if config.scaled {
            scale_factor(history_last, window[window.len() - 1], config.alpha_clamp)
        } else {
            1.0
        };
        let forecast: Vec<f64> = future.iter().map(|v| (alpha * v).max(0.0)).collect();
        let m = mape(truth, &forecast)?;
        let r = rmse(truth, &forecast)?;
        let better = match &best {
            None => true,
            Some(b) => {
                let key = |x: Option<f64>| x.unwrap_or(f64::INFINITY);
                match key(m).total_cmp(&key(b.mape)) {
                    std::cmp::Ordering::Less => true,
                    std::cmp::Ordering::Greater => false,
                    std::cmp::Ordering::Equal => r
                        .total_cmp(&b.rmse)
                        .then_with(|| candidate.cmp(&b.candidate))
                        .is_lt(),
                }
            }
        };
        if better {
            best = Some(OracleMatch {
                candidate,
                alpha,
                forecast,
                mape: m,
                rmse: r,
            });
        }
    }
    best.ok_or(Error::NoCandidates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::{forecast_with_pool, Metric};
    use crate::store::SeriesStore;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn store(series: Vec<(&str, Vec<f64>)>) -> SeriesStore {
        let first = NaiveDate::from_ymd_opt(2012, 1, 1).unwrap();
        let n = series.iter().map(|s| s.1.len()).max().unwrap();
        SeriesStore::from_values(first, first + chrono::Days::new(n as u64 - 1), series).unwrap()
    }

    fn cfg(window: usize, horizon: usize) -> ForecastConfig {
        ForecastConfig {
            k: 1,
            window,
            horizon,
            scaled: false,
            ..Default::default()
        }
    }

    #[test]
    fn identical_future_wins_with_zero_error() {
        let s = store(vec![("a", vec![1.0, 2.0, 10.0, 20.0, 30.0, 5.0, 5.0])]);
        let c = cfg(2, 3);
        let pool = CandidatePool::build(&["a"], &s, 7, &c).unwrap();
        let m = oracle_match(&[10.0, 20.0, 30.0], &[1.0, 1.0], &pool, &c).unwrap();
        assert_eq!(m.candidate.shift, 2);
        assert_eq!(m.mape, Some(0.0));
    }

    #[test]
    fn lower_mape_wins() {
        // truth [100, 100]; futures [112, 88] (12%) and [130, 70] (30%)
        let s = store(vec![
            ("a", vec![1.0, 112.0, 88.0]),
            ("b", vec![1.0, 130.0, 70.0]),
        ]);
        let c = cfg(1, 2);
        let pool = CandidatePool::build(&["b", "a"], &s, 3, &c).unwrap();
        assert_eq!(pool.len(), 2);
        let m = oracle_match(&[100.0, 100.0], &[1.0], &pool, &c).unwrap();
        assert_eq!(m.candidate.uri, "a");
        assert!((m.mape.unwrap() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn empty_pool_is_an_error() {
        let s = store(vec![("a", vec![0.0; 5])]);
        let c = cfg(2, 2);
        let pool = CandidatePool::build(&["a"], &s, 5, &c).unwrap();
        assert!(oracle_match(&[1.0, 1.0], &[1.0, 1.0], &pool, &c).is_err());
    }

    proptest! {
        #[test]
        fn oracle_bounds_one_nn(values in proptest::collection::vec(1.0f64..100.0, 50), metric in 0..3usize, scaled in any::<bool>()) {
            let s = store(vec![("a", values.clone())]);
            let c = ForecastConfig {
                metric: [Metric::Euclidean, Metric::MuSigma, Metric::YInvariant][metric],
                scaled,
                ..cfg(5, 4)
            };
            let pool = CandidatePool::build(&["a"], &s, 46, &c).unwrap();
            let history = &values[41..46];
            let truth = &values[46..50];
            let oracle = oracle_match(truth, history, &pool, &c).unwrap();
            let f = forecast_with_pool("a", history, &pool, &c).unwrap();
            prop_assert!(oracle.mape.unwrap() <= mape(truth, &f.values).unwrap().unwrap());
        }
    }
}
