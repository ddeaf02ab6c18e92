//! From ranked per-channel feeds to scored topic clusters and their
//! activity sequences.

pub mod analytics;
mod borda;
mod cluster;
pub mod io;
mod resolve;
mod sequences;
mod text;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::NaiveDate;

use crate::Result;

pub use analytics::{
    category_distribution, channel_delays, ActivitySpan, ChannelDelayStats, ChannelGroups,
};
pub use borda::{borda_daily_scores, borda_points};
pub use cluster::{cluster_topics, TopicStats};
pub use resolve::{resolve_topic_uri, Resolution, TitleIndex, FUZZY_FACTOR};
pub use sequences::{lifetime, split_dated, split_runs, split_sequences};
pub use text::{levenshtein, normalize_topic};

pub type ClusterId = u32;

/// Default edit-distance threshold factor for clustering.
pub const CLUSTER_FACTOR: f64 = 0.35;

/// One ranked entry of one feed on one day.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTrendEntry {
    pub date: NaiveDate,
    pub channel: String,
    /// 1-based.
    pub rank: u32,
    pub topic: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicCluster {
    pub id: ClusterId,
    /// Most prominent member.
    pub label: String,
    pub members: BTreeSet<String>,
    pub uri: Option<String>,
    /// Borda score per day, summed over all feeds.
    pub daily_scores: BTreeMap<NaiveDate, f64>,
    /// The same scores broken down by feed.
    pub channel_scores: BTreeMap<String, BTreeMap<NaiveDate, f64>>,
}

/// A maximal gap-bridged run of positive scores of one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendSequence {
    pub cluster_id: ClusterId,
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// One score per day in `start..=end`.
    pub scores: Vec<f64>,
}

/// Sum of a cluster's daily scores over the observation period.
pub fn global_trend_score(cluster: &TopicCluster) -> f64 {
    cluster.daily_scores.values().sum()
}

/// Clusters ordered by descending global score (ties by id), truncated to `n`.
pub fn top_clusters(clusters: &[TopicCluster], n: usize) -> Vec<&TopicCluster> {
    let mut ranked: Vec<(&TopicCluster, f64)> =
        clusters.iter().map(|c| (c, global_trend_score(c))).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.id.cmp(&b.0.id)));
    ranked.into_iter().take(n).map(|(c, _)| c).collect()
}

/// Resolves, clusters and scores raw feed entries.
///
/// Topics are normalized first. `index` maps topics to article uris; when it
/// is `None` clusters stay unresolved.
pub fn build_clusters(
    entries: &[RawTrendEntry],
    index: Option<&TitleIndex>,
    threshold_factor: f64,
) -> Result<Vec<TopicCluster>> {
    let points = borda_points(entries)?;
    let normalized: Vec<String> = entries.iter().map(|e| normalize_topic(&e.topic)).collect();

    let mut per_topic: BTreeMap<&str, (u64, f64)> = BTreeMap::new();
    for (topic, p) in normalized.iter().zip(&points) {
        let slot = per_topic.entry(topic.as_str()).or_default();
        slot.0 += 1;
        slot.1 += p;
    }
    let mut stats = Vec::with_capacity(per_topic.len());
    for (topic, (appearances, borda)) in per_topic {
        let uri = match index {
            Some(index) => resolve_topic_uri(topic, index)?.uri().map(str::to_string),
            None => None,
        };
        stats.push(TopicStats {
            topic: topic.to_string(),
            appearances,
            borda,
            uri,
        });
    }

    let mut clusters = cluster_topics(&stats, threshold_factor)?;
    let assignment: HashMap<&str, usize> = clusters
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.members.iter().map(move |m| (m.as_str(), i)))
        .collect();
    let assignment: HashMap<String, usize> =
        assignment.into_iter().map(|(k, v)| (k.to_string(), v)).collect();

    for ((e, topic), p) in entries.iter().zip(&normalized).zip(&points) {
        let c = &mut clusters[assignment[topic]];
        *c.daily_scores.entry(e.date).or_insert(0.0) += p;
        *c.channel_scores
            .entry(e.channel.clone())
            .or_default()
            .entry(e.date)
            .or_insert(0.0) += p;
    }
    Ok(clusters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Days;

    fn entry(day: u64, channel: &str, rank: u32, topic: &str) -> RawTrendEntry {
        RawTrendEntry {
            date: NaiveDate::from_ymd_opt(2012, 2, 1).unwrap() + Days::new(day),
            channel: channel.into(),
            rank,
            topic: topic.into(),
        }
    }

    #[test]
    fn pipeline_scores_and_ranks() {
        let entries = vec![
            entry(0, "g", 1, "Super Bowl"),
            entry(0, "g", 2, "Weather"),
            entry(0, "t", 1, "superbowl"),
            entry(1, "g", 1, "Weather"),
            entry(1, "g", 2, "Super Bowl"),
        ];
        let index = TitleIndex::from_uris(["Super_Bowl", "Weather"]);
        let clusters = build_clusters(&entries, Some(&index), CLUSTER_FACTOR).unwrap();
        assert_eq!(clusters.len(), 2);
        let sb = clusters.iter().find(|c| c.members.contains("superbowl")).unwrap();
        assert_eq!(sb.uri.as_deref(), Some("Super_Bowl"));
        // day 0: 2 (g) + 1 (t); day 1: 1
        assert_eq!(global_trend_score(sb), 4.0);
        let top = top_clusters(&clusters, 1);
        assert_eq!(top[0].id, sb.id);
        let seq_total: f64 = split_sequences(sb).iter().map(|s| s.total_score()).sum();
        assert_eq!(seq_total, global_trend_score(sb));
    }

    #[test]
    fn global_score_sums_days() {
        let d = NaiveDate::from_ymd_opt(2012, 1, 1).unwrap();
        let mut c = TopicCluster {
            id: 0,
            label: "x".into(),
            members: BTreeSet::from(["x".to_string()]),
            uri: None,
            daily_scores: BTreeMap::new(),
            channel_scores: BTreeMap::new(),
        };
        assert_eq!(global_trend_score(&c), 0.0);
        c.daily_scores.insert(d, 3.0);
        c.daily_scores.insert(d + Days::new(1), 2.0);
        assert_eq!(global_trend_score(&c), 5.0);
    }
}
