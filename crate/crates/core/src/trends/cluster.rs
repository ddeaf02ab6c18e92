use std::collections::{BTreeMap, BTreeSet};

use super::text::levenshtein_chars;
use super::{ClusterId, TopicCluster};
use crate::{Error, Result};

/// Per-topic aggregates the greedy clustering works from.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicStats {
    /// Normalized topic text.
    pub topic: String,
    /// How many feed entries carried this topic.
    pub appearances: u64,
    /// Borda points summed over every feed and day.
    pub borda: f64,
    pub uri: Option<String>,
}

struct Building {
    members: Vec<usize>,
    label: usize,
    label_chars: Vec<char>,
}

fn prominence_order(topics: &[TopicStats], a: usize, b: usize) -> std::cmp::Ordering {
    topics[b]
        .borda
        .total_cmp(&topics[a].borda)
        .then_with(|| topics[a].topic.cmp(&topics[b].topic))
}

/// Greedy single-pass agglomeration by edit distance to each cluster's label.
///
/// Topics are visited by descending appearance count (ties lexicographic).
/// A topic joins the first cluster whose current label is closer than
/// `threshold_factor × max(len(topic), len(label))` characters; otherwise it
/// founds a new cluster. A cluster's label is its member with the highest
/// Borda total (ties lexicographic).
pub fn cluster_topics(topics: &[TopicStats], threshold_factor: f64) -> Result<Vec<TopicCluster>> {
    if !(threshold_factor > 0.0 && threshold_factor < 1.0) {
        return Err(Error::Config(format!(
            "clustering threshold factor {threshold_factor} is not in (0, 1)"
        )));
    }
    let mut order: Vec<usize> = (0..topics.len()).collect();
    order.sort_by(|&a, &b| {
        topics[b]
            .appearances
            .cmp(&topics[a].appearances)
            .then_with(|| topics[a].topic.cmp(&topics[b].topic))
    });

    let mut clusters: Vec<Building> = Vec::new();
    let mut seen = BTreeSet::new();
    for i in order {
        if !seen.insert(topics[i].topic.as_str()) {
            continue;
        }
        let chars: Vec<char> = topics[i].topic.chars().collect();
        let joined = clusters.iter_mut().find(|c| {
            let limit = threshold_factor * chars.len().max(c.label_chars.len()) as f64;
            (chars.len().abs_diff(c.label_chars.len()) as f64) < limit
                && (levenshtein_chars(&chars, &c.label_chars) as f64) < limit
        });
        match joined {
            Some(c) => {
                c.members.push(i);
                if prominence_order(topics, i, c.label).is_lt() {
                    c.label = i;
                    c.label_chars = chars;
                }
            }
            None => clusters.push(Building {
                members: vec![i],
                label: i,
                label_chars: chars,
            }),
        }
    }

    Ok(clusters
        .into_iter()
        .enumerate()
        .map(|(id, c)| {
            let mut ranked = c.members.clone();
            ranked.sort_by(|&a, &b| prominence_order(topics, a, b));
            let uri = topics[c.label]
                .uri
                .clone()
                .or_else(|| ranked.iter().find_map(|&m| topics[m].uri.clone()));
            TopicCluster {
                id: id as ClusterId,
                label: topics[c.label].topic.clone(),
                members: c.members.iter().map(|&m| topics[m].topic.clone()).collect(),
                uri,
                daily_scores: BTreeMap::new(),
                channel_scores: BTreeMap::new(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(topic: &str, appearances: u64, borda: f64) -> TopicStats {
        TopicStats {
            topic: topic.into(),
            appearances,
            borda,
            uri: None,
        }
    }

    fn member_sets(clusters: &[TopicCluster]) -> Vec<Vec<&str>> {
        clusters
            .iter()
            .map(|c| c.members.iter().map(String::as_str).collect())
            .collect()
    }

    #[test]
    fn superbowl_variants_merge() {
        // d(superbowl, super bowl) = 1 < 3.5; "weather" is >= 7 away from both
        let topics = [
            stats("superbowl", 3, 5.0),
            stats("super bowl", 2, 4.0),
            stats("weather", 1, 1.0),
        ];
        let clusters = cluster_topics(&topics, 0.35).unwrap();
        assert_eq!(
            member_sets(&clusters),
            vec![vec!["super bowl", "superbowl"], vec!["weather"]]
        );
        assert_eq!(clusters[0].label, "superbowl");
    }

    #[test]
    fn singleton() {
        let clusters = cluster_topics(&[stats("abc", 1, 1.0)], 0.35).unwrap();
        assert_eq!(member_sets(&clusters), vec![vec!["abc"]]);
    }

    #[test]
    fn greedy_compares_with_label_only() {
        // simulate by hand: aaaa founds; aaab is 1 < 1.4 away and joins (label
        // stays aaaa on the lexicographic tie); aabb is 2 >= 1.4 from aaaa.
        let topics = [stats("aaaa", 1, 1.0), stats("aaab", 1, 1.0), stats("aabb", 1, 1.0)];
        let clusters = cluster_topics(&topics, 0.35).unwrap();
        assert_eq!(member_sets(&clusters), vec![vec!["aaaa", "aaab"], vec!["aabb"]]);
    }

    #[test]
    fn label_follows_borda() {
        let topics = [stats("superbowl", 5, 1.0), stats("super bowl", 1, 9.0)];
        let clusters = cluster_topics(&topics, 0.35).unwrap();
        assert_eq!(clusters[0].label, "super bowl");
    }

    #[test]
    fn rejects_bad_factor() {
        assert!(cluster_topics(&[], 0.0).is_err());
        assert!(cluster_topics(&[], 1.0).is_err());
    }

    #[test]
    fn every_topic_in_exactly_one_cluster() {
        let words = ["olympics", "olympic", "olympics 2012", "london", "londres", "iphone 5", "iphone", "ipad"];
        let topics: Vec<_> = words.iter().enumerate().map(|(i, w)| stats(w, i as u64 % 3, i as f64)).collect();
        let a = cluster_topics(&topics, 0.35).unwrap();
        let b = cluster_topics(&topics, 0.35).unwrap();
        assert_eq!(a, b);
        let mut all: Vec<&str> = a.iter().flat_map(|c| c.members.iter().map(String::as_str)).collect();
        all.sort();
        let mut expected = words.to_vec();
        expected.sort();
        assert_eq!(all, expected);
        assert!(a.iter().all(|c| c.members.contains(&c.label)));
    }
}
