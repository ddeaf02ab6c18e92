use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};

use super::{TopicCluster, TrendSequence};

/// Index ranges `[start, end]` of activity runs in a day-by-day score list.
///
/// Positive days separated by a single zero day stay in one run; two or more
/// consecutive zero days end it. Runs start and end on positive days.
pub fn split_runs(scores: &[f64]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut current: Option<(usize, usize)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if s <= 0.0 {
            continue;
        }
        current = match current {
            Some((start, last)) if i - last <= 2 => Some((start, i)),
            Some(done) => {
                runs.push(done);
                Some((i, i))
            }
            None => Some((i, i)),
        };
    }
    runs.extend(current);
    runs
}

/// Splits dated scores (absent dates count as zero) into activity sequences.
pub fn split_dated(scores: &BTreeMap<NaiveDate, f64>) -> Vec<(NaiveDate, NaiveDate, Vec<f64>)> {
    let positive: Vec<(NaiveDate, f64)> = scores
        .iter()
        .filter(|(_, &s)| s > 0.0)
        .map(|(&d, &s)| (d, s))
        .collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < positive.len() {
        let mut j = i;
        while j + 1 < positive.len() && (positive[j + 1].0 - positive[j].0).num_days() <= 2 {
            j += 1;
        }
        let (start, end) = (positive[i].0, positive[j].0);
        let len = (end - start).num_days() as usize + 1;
        let mut values = vec![0.0; len];
        for &(d, s) in &positive[i..=j] {
            values[(d - start).num_days() as usize] = s;
        }
        out.push((start, end, values));
        i = j + 1;
    }
    out
}

pub fn split_sequences(cluster: &TopicCluster) -> Vec<TrendSequence> {
    split_dated(&cluster.daily_scores)
        .into_iter()
        .map(|(start, end, scores)| TrendSequence {
            cluster_id: cluster.id,
            start,
            end,
            scores,
        })
        .collect()
}

/// Number of days from start to end, inclusive.
pub fn lifetime(seq: &TrendSequence) -> i64 {
    (seq.end - seq.start).num_days() + 1
}

impl TrendSequence {
    pub fn lifetime(&self) -> i64 {
        lifetime(self)
    }

    pub fn total_score(&self) -> f64 {
        self.scores.iter().sum()
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        (0..self.scores.len() as u64).map(|i| self.start + Days::new(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Segments by scanning the raw vector for "0,0" runs between positive
    /// days, independent of the gap arithmetic above.
    fn oracle(scores: &[f64]) -> Vec<(usize, usize)> {
        let positive: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] > 0.0).collect();
        let mut runs: Vec<(usize, usize)> = Vec::new();
        for &p in &positive {
            let joins = runs.last().is_some_and(|&(_, last)| {
                !(last + 1..p).any(|z| z + 1 < p && scores[z] <= 0.0 && scores[z + 1] <= 0.0)
            });
            if joins {
                runs.last_mut().unwrap().1 = p;
            } else {
                runs.push((p, p));
            }
        }
        runs
    }

    #[test]
    fn single_gap_is_bridged() {
        assert_eq!(split_runs(&[3.0, 2.0, 0.0, 4.0]), vec![(0, 3)]);
    }

    #[test]
    fn double_gap_splits() {
        assert_eq!(split_runs(&[3.0, 0.0, 0.0, 4.0]), vec![(0, 0), (3, 3)]);
    }

    #[test]
    fn singleton_and_lifetime() {
        assert_eq!(split_runs(&[5.0]), vec![(0, 0)]);
        let d = NaiveDate::from_ymd_opt(2012, 1, 3).unwrap();
        let seq = TrendSequence {
            cluster_id: 0,
            start: d,
            end: d,
            scores: vec![5.0],
        };
        assert_eq!(lifetime(&seq), 1);
        let seq = TrendSequence {
            end: d + Days::new(3),
            scores: vec![1.0; 4],
            ..seq
        };
        assert_eq!(lifetime(&seq), 4);
    }

    #[test]
    fn dated_split_matches_index_split() {
        let base = NaiveDate::from_ymd_opt(2012, 1, 1).unwrap();
        let raw = [0.0, 3.0, 0.0, 2.0, 0.0, 0.0, 1.0, 0.0];
        let dated: BTreeMap<_, _> = raw
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0.0)
            .map(|(i, &s)| (base + Days::new(i as u64), s))
            .collect();
        let seqs = split_dated(&dated);
        assert_eq!(seqs.len(), 2);
        assert_eq!(seqs[0].2, vec![3.0, 0.0, 2.0]);
        assert_eq!(seqs[1].0, base + Days::new(6));
    }

    proptest! {
        #[test]
        fn agrees_with_oracle(raw in proptest::collection::vec(prop_oneof![Just(0.0), 0.5f64..10.0], 0..60)) {
            let runs = split_runs(&raw);
            prop_assert_eq!(&runs, &oracle(&raw));
            // every positive day covered exactly once; no double zero inside
            for (i, &s) in raw.iter().enumerate() {
                let hits = runs.iter().filter(|&&(a, b)| a <= i && i <= b).count();
                if s > 0.0 { prop_assert_eq!(hits, 1); }
            }
            for &(a, b) in &runs {
                prop_assert!(raw[a] > 0.0 && raw[b] > 0.0);
                prop_assert!(!(a..b).any(|i| raw[i] <= 0.0 && raw[i + 1] <= 0.0));
            }
        }
    }
}
