//! Forecasting of trending topics in daily page-view series.
//!
//! The crate is organised along the pipeline:
//!
//! * [`store`] ingests hourly page-view dumps into gap-filled daily series.
//! * [`trends`] unifies ranked trend feeds into scored topic clusters and
//!   splits them into activity sequences.
//! * [`semantic`] loads category/type assertions and finds topics that share
//!   the most of them with a trending topic.
//! * [`forecast`] matches the recent history of a topic against shifted
//!   windows of related topics and combines the continuations of the k best
//!   matches.
//! * [`eval`] holds the baselines, error metrics, the oracle matcher and the
//!   moving-window backtest.
//!
//! Data-parallel loops go through [`par`], which falls back to plain
//! iterators when the `parallel` feature is disabled.

pub mod error;
pub mod eval;
pub mod forecast;
pub mod par;
pub mod semantic;
pub mod store;
pub mod synth;
pub mod trends;

pub use error::{Error, Result};
