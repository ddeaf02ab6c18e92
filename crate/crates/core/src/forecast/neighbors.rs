use std::cmp::Ordering;
use std::collections::BinaryHeap;

use log::warn;
use serde::{Deserialize, Serialize};

use super::candidates::{CandidatePool, CandidateRef, PoolTopic};
use super::{scale_factor, ForecastConfig, PreparedQuery};
use crate::{par, Error, Result};

/// A selected neighbour with its distance and scale factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborMatch {
    pub candidate: CandidateRef,
    pub distance: f64,
    pub alpha: f64,
}

/// Total order used for selection: distance, then uri, then shift.
fn rank(a: (f64, &str, i64), b: (f64, &str, i64)) -> Ordering {
    a.0.total_cmp(&b.0)
        .then_with(|| a.1.cmp(b.1))
        .then_with(|| a.2.cmp(&b.2))
}

/// Greedy selection over `ranked` (already in selection order): keep an item
/// unless an earlier kept item of the same uri lies closer than `separation`
/// days. Stops after `k` items.
pub fn select_separated<'a, I>(ranked: I, k: usize, separation: usize) -> Vec<usize>
where
    I: IntoIterator<Item = (&'a str, i64)>,
{
    let mut kept: Vec<(&str, i64)> = Vec::with_capacity(k);
    let mut out = Vec::with_capacity(k);
    for (i, (uri, shift)) in ranked.into_iter().enumerate() {
        if out.len() == k {
            break;
        }
        let clash = kept
            .iter()
            .any(|&(u, s)| u == uri && s.abs_diff(shift) < separation as u64);
        if !clash {
            kept.push((uri, shift));
            out.push(i);
        }
    }
    out
}

#[derive(PartialEq)]
struct Scored {
    distance: f64,
    shift: i64,
}

impl Eq for Scored {}

impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scored {
    fn cmp(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.shift.cmp(&other.shift))
    }
}

/// Best separated matches within one topic, at most `k`.
///
/// Greedy selection in rank order accepts its k-th item among the first
/// `k * (2 * separation - 1)` ranked candidates, because every accepted item
/// rules out at most `2 * (separation - 1)` others. Keeping only that many
/// per topic is therefore exact, and it gives the early-abandon threshold.
fn scan_topic(
    topic: &PoolTopic,
    query: &PreparedQuery,
    window: usize,
    k: usize,
    separation: usize,
) -> Vec<(f64, i64)> {
    let cap = k.saturating_mul(2 * separation - 1);
    let mut heap: BinaryHeap<Scored> = BinaryHeap::with_capacity(cap + 1);
    for &shift in &topic.shifts {
        let bound = if heap.len() == cap {
            heap.peek().map_or(f64::INFINITY, |w| w.distance)
        } else {
            f64::INFINITY
        };
        let distance = query.distance(topic.window(shift, window), bound);
        if !distance.is_finite() {
            continue;
        }
        // shifts arrive in increasing order, so an equal distance never
        // outranks the current worst
        if heap.len() < cap {
            heap.push(Scored { distance, shift });
        } else if distance < bound {
            heap.pop();
            heap.push(Scored { distance, shift });
        }
    }
    let ranked = heap.into_sorted_vec();
    select_separated(
        ranked.iter().map(|s| (topic.uri.as_str(), s.shift)),
        k,
        separation,
    )
    .into_iter()
    .map(|i| (ranked[i].distance, ranked[i].shift))
    .collect()
}

/// The `k` nearest candidates to `history` in `pool`, ordered by
/// `(distance, uri, shift)`, with matches of one topic kept at least the
/// configured separation apart. Returns fewer than `k` with a warning when
/// the pool runs short.
pub fn nearest_neighbors(
    history: &[f64],
    pool: &CandidatePool,
    config: &ForecastConfig,
) -> Result<Vec<NeighborMatch>> {
    if history.len() != pool.window {
        return Err(Error::LengthMismatch {
            left: history.len(),
            right: pool.window,
        });
    }
    let query = PreparedQuery::new(config.metric, history);
    let separation = config.separation();
    let per_topic = par::map(&pool.topics, |t| {
        scan_topic(t, &query, pool.window, config.k, separation)
    });
    let mut merged: Vec<(f64, &PoolTopic, i64)> = pool
        .topics
        .iter()
        .zip(per_topic)
        .flat_map(|(t, picks)| picks.into_iter().map(move |(d, s)| (d, t, s)))
        .collect();
    merged.sort_by(|a, b| rank((a.0, &a.1.uri, a.2), (b.0, &b.1.uri, b.2)));
    merged.truncate(config.k);
    if merged.is_empty() {
        return Err(Error::NoCandidates);
    }
    if merged.len() < config.k {
        warn!(
            "only {} of {} neighbours available at t0 = {}",
            merged.len(),
            config.k,
            pool.t0
        );
    }
    let history_last = *history.last().unwrap();
    Ok(merged
        .into_iter()
        .map(|(distance, topic, shift)| {
            let alpha = if config.scaled {
                let last = topic.window(shift, pool.window)[pool.window - 1];
                scale_factor(history_last, last, config.alpha_clamp)
            } else {
                1.0
            };
            NeighborMatch {
                candidate: CandidateRef {
                    uri: topic.uri.clone(),
                    shift,
                },
                distance,
                alpha,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::{distance, Metric};
    use crate::store::SeriesStore;
    use chrono::NaiveDate;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn store(series: Vec<(String, Vec<f64>)>) -> SeriesStore {
        let first = NaiveDate::from_ymd_opt(2012, 1, 1).unwrap();
        let n = series.iter().map(|s| s.1.len()).max().unwrap();
        let last = first + chrono::Days::new(n as u64 - 1);
        SeriesStore::from_values(first, last, series).unwrap()
    }

    /// Exhaustive scan straight off the store: every shift, every distance,
    /// full sort, then greedy separated selection.
    fn brute_force(
        history: &[f64],
        topics: &[String],
        store: &SeriesStore,
        t0: i64,
        cfg: &ForecastConfig,
    ) -> Vec<(String, i64, f64)> {
        let mut all = Vec::new();
        for uri in topics {
            for shift in 1..=t0 - cfg.horizon as i64 {
                let win = store.window(uri, shift - 1, cfg.window).unwrap();
                if win.iter().all(|&v| v == 0.0) || (cfg.scaled && win[cfg.window - 1] <= 0.0) {
                    continue;
                }
                let d = distance(cfg.metric, history, &win).unwrap();
                if d.is_finite() {
                    all.push((uri.clone(), shift, d));
                }
            }
        }
        all.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
        let mut out: Vec<(String, i64, f64)> = Vec::new();
        for c in all {
            if out.len() == cfg.k {
                break;
            }
            let sep = cfg.separation() as i64;
            if out.iter().all(|o| o.0 != c.0 || (o.1 - c.1).abs() >= sep) {
                out.push(c);
            }
        }
        out
    }

    #[test]
    fn identical_candidate_is_found() {
        let v: Vec<f64> = (0..40).map(|i| ((i * 7) % 11) as f64 + 1.0).collect();
        let s = store(vec![("a".into(), v.clone())]);
        let cfg = ForecastConfig {
            k: 1,
            window: 5,
            horizon: 3,
            ..Default::default()
        };
        let pool = CandidatePool::build(&["a"], &s, 40, &cfg).unwrap();
        let history = &v[10..15];
        let nn = nearest_neighbors(history, &pool, &cfg).unwrap();
        assert_eq!(nn[0].distance, 0.0);
        assert_eq!(&s.window("a", nn[0].candidate.shift - 1, 5).unwrap()[..], history);
    }

    #[test]
    fn picks_two_closest_of_three() {
        // history [1,2]; windows [1,2], [3,5], [0,1] → distances 0, 13, 2
        let s = store(vec![
            ("a".into(), vec![1.0, 2.0, 9.0]),
            ("b".into(), vec![3.0, 5.0, 9.0]),
            ("c".into(), vec![1.0, 1.0, 9.0]),
        ]);
        let cfg = ForecastConfig {
            k: 2,
            window: 2,
            horizon: 1,
            scaled: false,
            ..Default::default()
        };
        let pool = CandidatePool::build(&["a", "b", "c"], &s, 3, &cfg).unwrap();
        assert_eq!(pool.len(), 6);
        let nn = nearest_neighbors(&[1.0, 2.0], &pool, &cfg).unwrap();
        let got: Vec<(&str, i64, f64)> = nn
            .iter()
            .map(|m| (m.candidate.uri.as_str(), m.candidate.shift, m.distance))
            .collect();
        assert_eq!(got, vec![("a", 2, 0.0), ("c", 2, 1.0)]);
    }

    #[test]
    fn shortage_returns_what_exists() {
        let s = store(vec![("a".into(), vec![1.0, 2.0, 3.0, 4.0, 5.0])]);
        let cfg = ForecastConfig {
            k: 3,
            window: 2,
            horizon: 1,
            min_shift_separation: Some(1),
            ..Default::default()
        };
        let pool = CandidatePool::build(&["a"], &s, 3, &cfg).unwrap();
        assert_eq!(nearest_neighbors(&[1.0, 2.0], &pool, &cfg).unwrap().len(), 2);
        let cfg = ForecastConfig { k: 3, window: 2, horizon: 2, ..cfg };
        let pool = CandidatePool::build(&["a"], &s, 2, &cfg).unwrap();
        assert!(matches!(
            nearest_neighbors(&[1.0, 2.0], &pool, &cfg),
            Err(Error::NoCandidates)
        ));
    }

    #[test]
    fn same_topic_matches_keep_apart() {
        let v: Vec<f64> = (0..200).map(|i| 100.0 + (i as f64 * 0.3).sin()).collect();
        let s = store(vec![("a".into(), v)]);
        let cfg = ForecastConfig {
            k: 4,
            window: 10,
            horizon: 7,
            ..Default::default()
        };
        let pool = CandidatePool::build(&["a"], &s, 200, &cfg).unwrap();
        let nn = nearest_neighbors(&[100.0; 10], &pool, &cfg).unwrap();
        assert_eq!(nn.len(), 4);
        for a in &nn {
            for b in &nn {
                if a != b {
                    assert!(a.candidate.shift.abs_diff(b.candidate.shift) >= 7);
                }
            }
        }
    }

    fn random_instance(seed: u64) -> (SeriesStore, Vec<String>, i64, ForecastConfig, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let topics = rng.random_range(1..8);
        let days = rng.random_range(40..120);
        let series: Vec<(String, Vec<f64>)> = (0..topics)
            .map(|t| {
                let start = rng.random_range(0..days / 2);
                let v = (0..days)
                    .map(|d| {
                        if d < start || rng.random_bool(0.1) {
                            0.0
                        } else {
                            // few distinct levels so ties happen
                            rng.random_range(0..6) as f64 * 10.0
                        }
                    })
                    .collect();
                (format!("t{t}"), v)
            })
            .collect();
        let names = series.iter().map(|s| s.0.clone()).collect();
        let s = store(series);
        let metric = [Metric::Euclidean, Metric::MuSigma, Metric::YInvariant][rng.random_range(0..3)];
        let cfg = ForecastConfig {
            metric,
            k: [1, 3, 5][rng.random_range(0..3)],
            window: rng.random_range(if metric == Metric::MuSigma { 2 } else { 1 }..12),
            horizon: rng.random_range(1..8),
            scaled: rng.random_bool(0.5),
            min_shift_separation: if rng.random_bool(0.3) { Some(1) } else { None },
            ..Default::default()
        };
        let t0 = rng.random_range(cfg.horizon as i64 + 2..=days as i64);
        let history: Vec<f64> = (0..cfg.window).map(|_| rng.random_range(0..6) as f64 * 10.0 + 1.0).collect();
        (s, names, t0, cfg, history)
    }

    #[test]
    fn matches_brute_force() {
        for seed in 0..300 {
            let (s, names, t0, cfg, history) = random_instance(seed);
            let pool = CandidatePool::build(&names, &s, t0, &cfg).unwrap();
            let expect = brute_force(&history, &names, &s, t0, &cfg);
            match nearest_neighbors(&history, &pool, &cfg) {
                Ok(nn) => {
                    let got: Vec<(String, i64, f64)> = nn
                        .into_iter()
                        .map(|m| (m.candidate.uri, m.candidate.shift, m.distance))
                        .collect();
                    assert_eq!(got, expect, "seed {seed}");
                }
                Err(Error::NoCandidates) => assert!(expect.is_empty(), "seed {seed}"),
                Err(e) => panic!("seed {seed}: {e}"),
            }
        }
    }

    proptest! {
        #[test]
        fn greedy_selection_is_separated(
            items in proptest::collection::vec((0..3usize, 0..50i64), 0..40),
            k in 1..6usize,
            sep in 1..6usize,
        ) {
            let names = ["a", "b", "c"];
            let ranked: Vec<(&str, i64)> = items.iter().map(|&(u, s)| (names[u], s)).collect();
            let picked = select_separated(ranked.iter().copied(), k, sep);
            prop_assert!(picked.len() <= k);
            for (i, &a) in picked.iter().enumerate() {
                for &b in &picked[i + 1..] {
                    let (ua, sa) = ranked[a];
                    let (ub, sb) = ranked[b];
                    prop_assert!(ua != ub || sa.abs_diff(sb) >= sep as u64);
                }
            }
        }
    }
}
