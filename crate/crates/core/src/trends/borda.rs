use std::collections::{BTreeMap, HashMap};

use super::{text::normalize_topic, ClusterId, RawTrendEntry};
use crate::{Error, Result};

/// Borda points for each entry, in input order.
///
/// Within one (date, channel) list of `m` entries the entry at rank `r`
/// earns `m - r + 1`. Ranks are taken by position after sorting, so lists
/// with gaps in their rank numbers still distribute `m(m+1)/2` points.
pub fn borda_points(entries: &[RawTrendEntry]) -> Result<Vec<f64>> {
    let mut lists: HashMap<(chrono::NaiveDate, &str), Vec<usize>> = HashMap::new();
    for (i, e) in entries.iter().enumerate() {
        lists.entry((e.date, e.channel.as_str())).or_default().push(i);
    }
    let mut points = vec![0.0; entries.len()];
    for ((date, channel), mut idx) in lists {
        idx.sort_by_key(|&i| entries[i].rank);
        if let Some(w) = idx.windows(2).find(|w| entries[w[0]].rank == entries[w[1]].rank) {
            return Err(Error::DuplicateRank {
                channel: channel.to_string(),
                rank: entries[w[0]].rank,
                date,
            });
        }
        let m = idx.len();
        for (pos, &i) in idx.iter().enumerate() {
            points[i] = (m - pos) as f64;
        }
    }
    Ok(points)
}

/// Daily cluster scores for one date: the summed Borda points of every
/// member entry across all feeds. `assignment` maps normalized topics to
/// their cluster.
pub fn borda_daily_scores(
    entries: &[RawTrendEntry],
    assignment: &HashMap<String, ClusterId>,
) -> Result<BTreeMap<ClusterId, f64>> {
    let points = borda_points(entries)?;
    let mut scores = BTreeMap::new();
    for (e, p) in entries.iter().zip(points) {
        let topic = normalize_topic(&e.topic);
        let id = assignment
            .get(&topic)
            .ok_or_else(|| Error::Unclustered(e.topic.clone()))?;
        *scores.entry(*id).or_insert(0.0) += p;
    }
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn entry(channel: &str, rank: u32, topic: &str) -> RawTrendEntry {
        RawTrendEntry {
            date: NaiveDate::from_ymd_opt(2012, 2, 5).unwrap(),
            channel: channel.into(),
            rank,
            topic: topic.into(),
        }
    }

    fn assign(pairs: &[(&str, ClusterId)]) -> HashMap<String, ClusterId> {
        pairs.iter().map(|(t, c)| (t.to_string(), *c)).collect()
    }

    #[test]
    fn single_feed() {
        let entries = [entry("g", 1, "a"), entry("g", 2, "b"), entry("g", 3, "c")];
        let s = borda_daily_scores(&entries, &assign(&[("a", 0), ("b", 1), ("c", 2)])).unwrap();
        assert_eq!(s, BTreeMap::from([(0, 3.0), (1, 2.0), (2, 1.0)]));
    }

    #[test]
    fn sums_across_feeds() {
        let entries = [
            entry("g", 1, "super bowl"),
            entry("g", 2, "x"),
            entry("t", 1, "superbowl"),
            entry("t", 2, "y"),
        ];
        let s = borda_daily_scores(
            &entries,
            &assign(&[("super bowl", 0), ("superbowl", 0), ("x", 1), ("y", 2)]),
        )
        .unwrap();
        assert_eq!(s[&0], 4.0);
    }

    #[test]
    fn empty_date() {
        assert!(borda_daily_scores(&[], &HashMap::new()).unwrap().is_empty());
    }

    #[test]
    fn duplicate_rank_is_an_error() {
        let entries = [entry("g", 1, "a"), entry("g", 1, "b")];
        assert!(matches!(
            borda_daily_scores(&entries, &assign(&[("a", 0), ("b", 1)])),
            Err(Error::DuplicateRank { .. })
        ));
    }

    #[test]
    fn feed_total_is_triangular() {
        for m in 1..30u32 {
            let entries: Vec<_> = (1..=m).map(|r| entry("g", r, "t")).collect();
            let total: f64 = borda_points(&entries).unwrap().iter().sum();
            assert_eq!(total, f64::from(m * (m + 1) / 2));
        }
    }
}
