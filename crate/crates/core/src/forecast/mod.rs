//! k-nearest-neighbour forecasting over shifted sequences of a topic set.
//!
//! For a query at day `t0` the history is the `w` days before `t0`. A
//! candidate `(uri, shift)` contributes its `w` days before `shift` as the
//! window to match and its `h` days from `shift` on as the continuation, with
//! `shift <= t0 - h` so nothing at or after `t0` is ever read.

mod candidates;
mod combine;
mod config;
pub mod io;
mod metric;
mod neighbors;

pub use candidates::{enumerate_candidates, CandidatePool, CandidateRef};
pub use combine::{combine_values, forecast, forecast_with_pool, median, scale_factor, Forecast};
pub use config::{parse_key_values, Combine, ForecastConfig, Metric};
pub use metric::{
    distance_euclidean, distance_musigma, distance_y_invariant, mean_sd, y_invariant_gamma,
    z_normalize,
};
pub(crate) use metric::PreparedQuery;
pub use neighbors::{nearest_neighbors, select_separated, NeighborMatch};

/// Distance under `metric`.
pub fn distance(metric: Metric, x: &[f64], y: &[f64]) -> crate::Result<f64> {
    match metric {
        Metric::Euclidean => distance_euclidean(x, y),
        Metric::MuSigma => distance_musigma(x, y),
        Metric::YInvariant => distance_y_invariant(x, y),
    }
}
