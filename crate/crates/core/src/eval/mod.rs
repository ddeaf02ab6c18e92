//! Baselines, error metrics, the oracle matcher and the moving-window
//! backtest.
//!
//! A backtest walks each trend sequence from its trigger day: at offset `τ`
//! every method forecasts the remaining `h − τ` days from `trigger + τ`, and
//! errors are aggregated per method and offset over all sequences.

mod baselines;
pub mod io;
mod method;
mod metrics;
mod oracle;

use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::forecast::{forecast_with_pool, CandidatePool, Combine, ForecastConfig};
use crate::semantic::TopicSetKind;
use crate::store::SeriesStore;
use crate::{par, Error, Result};

pub use baselines::{
    baseline_linear_trend, baseline_naive, baseline_pooled_trend, TrendCurve, TrendLibrary,
};
pub use method::{Family, MethodId};
pub use metrics::{bootstrap_confidence, mape, rmse, trimmed_mean};
pub use oracle::{oracle_match, OracleMatch};

/// One trend sequence to backtest.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSequence {
    pub id: String,
    pub uri: String,
    /// Day index of the day the topic started trending.
    pub trigger: i64,
    pub categories: Vec<String>,
    /// Candidate pools by kind; a missing kind falls back to the topic alone.
    pub topic_sets: BTreeMap<TopicSetKind, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    pub horizon: usize,
    /// Share of worst MAPE values dropped per offset.
    pub outlier_fraction: f64,
    /// Days fitted by the linear trend.
    pub fit_window: usize,
    /// Normalization window of the pooled trends.
    pub trend_window: usize,
    /// Also run the oracle with this pool and config (k is ignored).
    pub oracle: Option<(TopicSetKind, ForecastConfig)>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            horizon: 14,
            outlier_fraction: 0.05,
            fit_window: 14,
            trend_window: 60,
            oracle: None,
        }
    }
}

/// Error of one method on one sequence at one offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointError {
    pub rmse: f64,
    pub mape: Option<f64>,
    /// The method could not run and the naive forecast stood in.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceOutcome {
    pub id: String,
    pub categories: Vec<String>,
    /// `errors[method][tau]`.
    pub errors: Vec<Vec<PointError>>,
    pub oracle: Option<Vec<PointError>>,
}

impl SequenceOutcome {
    /// RMSE of `method` averaged over all offsets.
    pub fn mean_rmse(&self, method: usize) -> f64 {
        let e = &self.errors[method];
        e.iter().map(|p| p.rmse).sum::<f64>() / e.len() as f64
    }
}

/// Aggregated errors of one method by offset.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub tau: Vec<usize>,
    /// Mean RMSE over sequences.
    pub rmse: Vec<f64>,
    /// Trimmed mean MAPE in percent; `None` without any valid sequence.
    pub mape: Vec<Option<f64>>,
    pub count: Vec<usize>,
    /// Sequences whose MAPE was defined.
    pub mape_count: Vec<usize>,
    /// Sequences dropped by the outlier trim.
    pub dropped: Vec<usize>,
    pub fallbacks: Vec<usize>,
}

impl ErrorCurve {
    fn aggregate<'a>(points: impl Fn(usize) -> Vec<&'a PointError>, horizon: usize, fraction: f64) -> Self {
        let mut c = ErrorCurve::default();
        for tau in 0..horizon {
            let pts = points(tau);
            let n = pts.len();
            c.tau.push(tau);
            c.count.push(n);
            c.rmse.push(if n == 0 {
                0.0
            } else {
                pts.iter().map(|p| p.rmse).sum::<f64>() / n as f64
            });
            let mapes: Vec<f64> = pts.iter().filter_map(|p| p.mape).collect();
            c.mape_count.push(mapes.len());
            match trimmed_mean(&mapes, fraction) {
                Some((m, d)) => {
                    c.mape.push(Some(m));
                    c.dropped.push(d);
                }
                None => {
                    c.mape.push(None);
                    c.dropped.push(0);
                }
            }
            c.fallbacks.push(pts.iter().filter(|p| p.fallback).count());
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub methods: Vec<MethodId>,
    /// One curve per entry of `methods`.
    pub curves: Vec<ErrorCurve>,
    pub oracle: Option<ErrorCurve>,
    /// Category → one curve per method.
    pub per_category: BTreeMap<String, Vec<ErrorCurve>>,
    pub outlier_fraction: f64,
    pub sequences: Vec<SequenceOutcome>,
    /// Ids of sequences outside the store or missing their topic.
    pub skipped: Vec<String>,
}

impl EvalReport {
    pub fn method_index(&self, name: &str) -> Option<usize> {
        self.methods.iter().position(|m| m.to_string() == name)
    }

    /// Per-sequence RMSE of `method` averaged over offsets, in sequence order.
    pub fn sequence_rmse(&self, method: usize) -> Vec<f64> {
        self.sequences.iter().map(|s| s.mean_rmse(method)).collect()
    }

    /// Mean over sequences and offsets of the RMSE of `method`.
    pub fn mean_rmse(&self, method: usize) -> f64 {
        let v = self.sequence_rmse(method);
        v.iter().sum::<f64>() / v.len().max(1) as f64
    }
}

struct Context<'a> {
    store: &'a SeriesStore,
    methods: &'a [MethodId],
    options: &'a EvalOptions,
    library: TrendLibrary,
}

fn in_range(seq: &EvalSequence, store: &SeriesStore, options: &EvalOptions) -> bool {
    store.contains(&seq.uri)
        && seq.trigger >= 1
        && seq.trigger + options.horizon as i64 <= store.num_days()
}

/// Topic pool of `kind` for `seq`.
fn pool_topics(seq: &EvalSequence, kind: TopicSetKind) -> Vec<String> {
    match seq.topic_sets.get(&kind) {
        Some(t) if !t.is_empty() => t.clone(),
        _ => vec![seq.uri.clone()],
    }
}

fn nn_config(base: &ForecastConfig, horizon: usize, remaining: usize) -> ForecastConfig {
    ForecastConfig {
        horizon: remaining,
        min_shift_separation: Some(base.min_shift_separation.unwrap_or(horizon)),
        ..base.clone()
    }
}

fn point(truth: &[f64], forecast: &[f64], fallback: bool) -> Result<PointError> {
    Ok(PointError {
        rmse: rmse(truth, forecast)?,
        mape: mape(truth, forecast)?,
        fallback,
    })
}

fn run_method(
    ctx: &Context,
    seq: &EvalSequence,
    method: &MethodId,
    dense: &[f64],
    tau: usize,
) -> Result<(Vec<f64>, bool)> {
    let h = ctx.options.horizon;
    let t0 = seq.trigger as usize + tau;
    let len = h - tau;
    let out = match method.family {
        Family::Naive => baseline_naive(dense, t0, len),
        Family::LinearTrend => baseline_linear_trend(dense, t0, len, ctx.options.fit_window),
        Family::AverageTrend | Family::MedianTrend => {
            let kind = if method.family == Family::AverageTrend {
                Combine::Average
            } else {
                Combine::Median
            };
            let history = ctx.store.window(&seq.uri, t0 as i64 - 1, ctx.options.trend_window)?;
            baseline_pooled_trend(kind, &ctx.library, Some(&seq.id), &history, tau, len)
        }
        Family::Nn => {
            let base = method.nn.as_ref().expect("nn method without config");
            let config = nn_config(base, h, len);
            let topics = pool_topics(seq, method.topic_set.unwrap_or(TopicSetKind::Similar));
            let pool = CandidatePool::build(&topics, ctx.store, t0 as i64, &config)?;
            let history = ctx.store.window(&seq.uri, t0 as i64 - 1, config.window)?;
            forecast_with_pool(&seq.uri, &history, &pool, &config).map(|f| f.values)
        }
    };
    match out {
        Ok(v) => Ok((v, false)),
        Err(Error::NoCandidates | Error::EmptyInput(_)) => {
            warn!("{method} has no forecast for {} at offset {tau}; using naive", seq.id);
            Ok((baseline_naive(dense, t0, len)?, true))
        }
        Err(e) => Err(e),
    }
}

fn run_oracle(
    ctx: &Context,
    seq: &EvalSequence,
    kind: TopicSetKind,
    base: &ForecastConfig,
    dense: &[f64],
    tau: usize,
) -> Result<PointError> {
    let h = ctx.options.horizon;
    let t0 = seq.trigger as usize + tau;
    let truth = &dense[t0..t0 + h - tau];
    let config = nn_config(base, h, h - tau);
    let pool = CandidatePool::build(&pool_topics(seq, kind), ctx.store, t0 as i64, &config)?;
    let history = ctx.store.window(&seq.uri, t0 as i64 - 1, config.window)?;
    match oracle_match(truth, &history, &pool, &config) {
        Ok(m) => point(truth, &m.forecast, false),
        Err(Error::NoCandidates) => point(truth, &baseline_naive(dense, t0, h - tau)?, true),
        Err(e) => Err(e),
    }
}

fn evaluate_sequence(ctx: &Context, seq: &EvalSequence) -> Result<SequenceOutcome> {
    let h = ctx.options.horizon;
    let dense = ctx.store.dense(&seq.uri)?;
    let mut errors = vec![Vec::with_capacity(h); ctx.methods.len()];
    let mut oracle = ctx.options.oracle.as_ref().map(|_| Vec::with_capacity(h));
    for tau in 0..h {
        let t0 = seq.trigger as usize + tau;
        let truth = &dense[t0..seq.trigger as usize + h];
        for (m, method) in ctx.methods.iter().enumerate() {
            let (forecast, fallback) = run_method(ctx, seq, method, &dense, tau)?;
            errors[m].push(point(truth, &forecast, fallback)?);
        }
        if let (Some(out), Some((kind, config))) = (oracle.as_mut(), &ctx.options.oracle) {
            out.push(run_oracle(ctx, seq, *kind, config, &dense, tau)?);
        }
    }
    Ok(SequenceOutcome {
        id: seq.id.clone(),
        categories: seq.categories.clone(),
        errors,
        oracle,
    })
}

/// Backtests `methods` on `sequences`.
///
/// Sequences whose topic is missing from the store or whose `h` days from the
/// trigger do not fit in the store are skipped with a warning. The pooled
/// trend baselines use every other evaluated sequence as their library.
pub fn moving_window_eval(
    sequences: &[EvalSequence],
    methods: &[MethodId],
    store: &SeriesStore,
    options: &EvalOptions,
) -> Result<EvalReport> {
    if options.horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&options.outlier_fraction) {
        return Err(Error::Config(format!(
            "outlier fraction {} must lie in [0, 1)",
            options.outlier_fraction
        )));
    }
    let h = options.horizon;
    let mut skipped = Vec::new();
    let mut kept = Vec::new();
    for seq in sequences {
        if in_range(seq, store, options) {
            kept.push(seq);
        } else {
            warn!("sequence {} ({}) is outside the store; skipped", seq.id, seq.uri);
            skipped.push(seq.id.clone());
        }
    }
    let mut library = TrendLibrary::new(options.trend_window, h);
    for seq in &kept {
        let values = store.window(&seq.uri, seq.trigger + h as i64 - 1, options.trend_window + h)?;
        library.push(seq.id.clone(), values)?;
    }
    let ctx = Context {
        store,
        methods,
        options,
        library,
    };
    let outcomes: Vec<SequenceOutcome> = par::map(&kept, |seq| evaluate_sequence(&ctx, seq))
        .into_iter()
        .collect::<Result<_>>()?;

    let fraction = options.outlier_fraction;
    let curve_for = |subset: &[&SequenceOutcome], m: usize| {
        ErrorCurve::aggregate(|tau| subset.iter().map(|s| &s.errors[m][tau]).collect(), h, fraction)
    };
    let all: Vec<&SequenceOutcome> = outcomes.iter().collect();
    let curves = (0..methods.len()).map(|m| curve_for(&all, m)).collect();
    let oracle = options.oracle.as_ref().map(|_| {
        ErrorCurve::aggregate(
            |tau| all.iter().map(|s| &s.oracle.as_ref().unwrap()[tau]).collect(),
            h,
            fraction,
        )
    });
    let mut by_category: BTreeMap<&str, Vec<&SequenceOutcome>> = BTreeMap::new();
    for s in &outcomes {
        for c in &s.categories {
            by_category.entry(c.as_str()).or_default().push(s);
        }
    }
    let per_category = by_category
        .into_iter()
        .map(|(c, subset)| {
            (
                c.to_string(),
                (0..methods.len()).map(|m| curve_for(&subset, m)).collect(),
            )
        })
        .collect();
    Ok(EvalReport {
        methods: methods.to_vec(),
        curves,
        oracle,
        per_category,
        outlier_fraction: fraction,
        sequences: outcomes,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn store(series: Vec<(&str, Vec<f64>)>) -> SeriesStore {
        let first = NaiveDate::from_ymd_opt(2012, 1, 1).unwrap();
        let n = series.iter().map(|s| s.1.len()).max().unwrap();
        SeriesStore::from_values(first, first + chrono::Days::new(n as u64 - 1), series).unwrap()
    }

    fn seq(id: &str, uri: &str, trigger: i64) -> EvalSequence {
        EvalSequence {
            id: id.into(),
            uri: uri.into(),
            trigger,
            categories: vec!["c".into()],
            topic_sets: BTreeMap::new(),
        }
    }

    #[test]
    fn naive_on_constant_truth_is_exact() {
        let s = store(vec![("a", vec![40.0; 100])]);
        let options = EvalOptions {
            trend_window: 10,
            ..Default::default()
        };
        let r = moving_window_eval(&[seq("s", "a", 70)], &[MethodId::baseline(Family::Naive)], &s, &options).unwrap();
        assert_eq!(r.curves[0].rmse, vec![0.0; 14]);
        assert_eq!(r.curves[0].mape, vec![Some(0.0); 14]);
        assert_eq!(r.curves[0].tau, (0..14).collect::<Vec<_>>());
    }

    #[test]
    fn out_of_range_sequences_are_skipped() {
        let s = store(vec![("a", vec![40.0; 30])]);
        let options = EvalOptions {
            trend_window: 5,
            ..Default::default()
        };
        let seqs = [seq("late", "a", 20), seq("early", "a", 0), seq("gone", "b", 5), seq("ok", "a", 10)];
        let r = moving_window_eval(&seqs, &[MethodId::baseline(Family::Naive)], &s, &options).unwrap();
        assert_eq!(r.skipped, vec!["late", "early", "gone"]);
        assert_eq!(r.sequences.len(), 1);
    }

    #[test]
    fn naive_rmse_shrinks_towards_a_constant_tail() {
        // decays geometrically towards 100
        let v: Vec<f64> = (0..80)
            .map(|d| if d < 40 { 100.0 } else { 100.0 + 1000.0 * 0.7f64.powi(d - 40) })
            .collect();
        let s = store(vec![("a", v)]);
        let options = EvalOptions {
            trend_window: 10,
            ..Default::default()
        };
        let r = moving_window_eval(&[seq("s", "a", 42)], &[MethodId::baseline(Family::Naive)], &s, &options).unwrap();
        let rm = &r.curves[0].rmse;
        assert!(rm.windows(2).all(|w| w[1] <= w[0]), "{rm:?}");
    }
}
