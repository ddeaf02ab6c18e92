use log::warn;
use serde::{Deserialize, Serialize};

use super::ForecastConfig;
use crate::store::SeriesStore;
use crate::{Error, Result};

/// A shifted sequence: topic `uri` aligned so that day `shift` plays the role
/// of the query's `t0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CandidateRef {
    pub uri: String,
    pub shift: i64,
}

#[derive(Debug, Clone)]
pub(crate) struct PoolTopic {
    pub(crate) uri: String,
    /// `w` leading zeros followed by the dense series truncated before `t0`,
    /// so the window of shift `s` is `padded[s..s + w]`.
    padded: Vec<f64>,
    pub(crate) shifts: Vec<i64>,
}

impl PoolTopic {
    pub(crate) fn window(&self, shift: i64, w: usize) -> &[f64] {
        let s = shift as usize;
        &self.padded[s..s + w]
    }

    /// The `len` days starting at `shift`.
    pub(crate) fn future(&self, shift: i64, w: usize, len: usize) -> &[f64] {
        let s = shift as usize + w;
        &self.padded[s..s + len]
    }
}

/// All admissible candidates of a topic set for one query day, with the data
/// they may read copied out of the store.
#[derive(Debug, Clone)]
pub struct CandidatePool {
    pub(crate) topics: Vec<PoolTopic>,
    pub(crate) window: usize,
    pub(crate) horizon: usize,
    pub(crate) t0: i64,
}

impl CandidatePool {
    /// Builds the pool for `topics` at query day `t0` (an index into the store).
    /// Topics absent from the store are skipped with a warning.
    pub fn build<S: AsRef<str>>(
        topics: &[S],
        store: &SeriesStore,
        t0: i64,
        config: &ForecastConfig,
    ) -> Result<Self> {
        config.validate()?;
        if topics.is_empty() {
            return Err(Error::EmptyInput("topic set".into()));
        }
        let (w, h) = (config.window, config.horizon);
        let num_days = store.num_days();
        if t0 < 1 || t0 > num_days {
            return Err(Error::OutOfRange {
                date: store.date_of(t0),
                first: store.first_date(),
                last: store.last_date(),
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        for uri in topics.iter().map(AsRef::as_ref) {
            if !seen.insert(uri) {
                continue;
            }
            let Ok(dense) = store.dense(uri) else {
                warn!("topic `{uri}` is not in the store; skipped");
                continue;
            };
            let mut padded = vec![0.0; w];
            padded.extend_from_slice(&dense[..t0 as usize]);
            // positive[i] = number of positive values in padded[..i]
            let mut positive = Vec::with_capacity(padded.len() + 1);
            positive.push(0u32);
            for v in &padded {
                positive.push(positive.last().unwrap() + u32::from(*v > 0.0));
            }
            let shifts = (1..=t0 - h as i64)
                .filter(|&s| {
                    let s = s as usize;
                    if positive[s + w] == positive[s] {
                        return false;
                    }
                    !config.scaled || padded[s + w - 1] > 0.0
                })
                .collect();
            out.push(PoolTopic {
                uri: uri.to_string(),
                padded,
                shifts,
            });
        }
        Ok(CandidatePool {
            topics: out,
            window: w,
            horizon: h,
            t0,
        })
    }

    pub fn t0(&self) -> i64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.topics.iter().map(|t| t.shifts.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = CandidateRef> + '_ {
        self.topics.iter().flat_map(|t| {
            t.shifts.iter().map(|&shift| CandidateRef {
                uri: t.uri.clone(),
                shift,
            })
        })
    }

    pub(crate) fn topic(&self, uri: &str) -> Option<&PoolTopic> {
        self.topics.iter().find(|t| t.uri == uri)
    }

    /// The `w`-day window matched for `candidate`.
    pub fn window_of(&self, candidate: &CandidateRef) -> Option<&[f64]> {
        let t = self.topic(&candidate.uri)?;
        t.shifts.binary_search(&candidate.shift).ok()?;
        Some(t.window(candidate.shift, self.window))
    }

    /// The `h` days following the window of `candidate`.
    pub fn future_of(&self, candidate: &CandidateRef) -> Option<&[f64]> {
        let t = self.topic(&candidate.uri)?;
        t.shifts.binary_search(&candidate.shift).ok()?;
        Some(t.future(candidate.shift, self.window, self.horizon))
    }
}

/// Every admissible `(uri, shift)` for a query at `t0`, ordered by topic set
/// order then shift.
pub fn enumerate_candidates<S: AsRef<str>>(
    topics: &[S],
    store: &SeriesStore,
    t0: i64,
    config: &ForecastConfig,
) -> Result<Vec<CandidateRef>> {
    Ok(CandidatePool::build(topics, store, t0, config)?.iter().collect())
}
