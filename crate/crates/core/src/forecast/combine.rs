use serde::{Deserialize, Serialize};

use super::{nearest_neighbors, CandidatePool, Combine, ForecastConfig, NeighborMatch};
use crate::store::SeriesStore;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub uri: String,
    /// Day index of the first forecast day.
    pub t0: i64,
    /// One value per horizon day.
    pub values: Vec<f64>,
    pub neighbors: Vec<NeighborMatch>,
}

/// `history_last / neighbor_last` clamped into `clamp`.
///
/// When the unclamped ratio is used, it is nudged by at most two ulps so that
/// `alpha * neighbor_last == history_last` holds exactly whenever some double
/// achieves it.
pub fn scale_factor(history_last: f64, neighbor_last: f64, clamp: (f64, f64)) -> f64 {
    let ratio = history_last / neighbor_last;
    // NaN (0/0) falls to the lower bound
    if ratio.is_nan() || ratio < clamp.0 {
        return clamp.0;
    }
    if ratio > clamp.1 {
        return clamp.1;
    }
    if ratio * neighbor_last == history_last {
        return ratio;
    }
    let mut candidates = [ratio; 4];
    let (mut up, mut down) = (ratio, ratio);
    for i in 0..2 {
        up = next_up(up);
        down = next_down(down);
        candidates[2 * i] = up;
        candidates[2 * i + 1] = down;
    }
    candidates
        .into_iter()
        .find(|&a| a * neighbor_last == history_last && a >= clamp.0 && a <= clamp.1)
        .unwrap_or(ratio)
}

fn next_up(x: f64) -> f64 {
    f64::from_bits(x.to_bits() + 1)
}

fn next_down(x: f64) -> f64 {
    f64::from_bits(x.to_bits() - 1)
}

/// Median of `values` (midpoint of the central pair for even counts).
pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of nothing");
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Pointwise combination of equally long rows, clamped at zero.
pub fn combine_values(rows: &[Vec<f64>], how: Combine) -> Vec<f64> {
    let Some(len) = rows.first().map(Vec::len) else {
        return Vec::new();
    };
    let mut column = Vec::with_capacity(rows.len());
    (0..len)
        .map(|tau| {
            column.clear();
            column.extend(rows.iter().map(|r| r[tau]));
            let v = match how {
                Combine::Median => median(&mut column),
                Combine::Average => column.iter().sum::<f64>() / column.len() as f64,
            };
            v.max(0.0)
        })
        .collect()
}

/// Forecast from an already built pool and history window.
pub fn forecast_with_pool(
    uri: &str,
    history: &[f64],
    pool: &CandidatePool,
    config: &ForecastConfig,
) -> Result<Forecast> {
    let neighbors = nearest_neighbors(history, pool, config)?;
    let rows: Vec<Vec<f64>> = neighbors
        .iter()
        .map(|m| {
            let future = pool
                .future_of(&m.candidate)
                .expect("neighbours come from the pool");
            future.iter().map(|v| m.alpha * v).collect()
        })
        .collect();
    Ok(Forecast {
        uri: uri.to_string(),
        t0: pool.t0(),
        values: combine_values(&rows, config.combine),
        neighbors,
    })
}

/// Forecasts the `h` days of `uri` starting at day index `t0`, matching its
/// last `w` days against shifted sequences of `topics`.
pub fn forecast<S: AsRef<str>>(
    uri: &str,
    t0: i64,
    topics: &[S],
    store: &SeriesStore,
    config: &ForecastConfig,
) -> Result<Forecast> {
    if !store.contains(uri) {
        return Err(Error::UnknownTopic(uri.to_string()));
    }
    let pool = CandidatePool::build(topics, store, t0, config)?;
    let history = store.window(uri, t0 - 1, config.window)?;
    forecast_with_pool(uri, &history, &pool, config)
}
