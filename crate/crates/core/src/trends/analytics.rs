//! Cross-channel timing and category statistics over trend clusters.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;

use super::{split_sequences, TopicCluster};
use crate::{Error, Result};

/// Start, peak and end day of one topic's activity in one channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActivitySpan {
    pub start: NaiveDate,
    pub peak: NaiveDate,
    pub end: NaiveDate,
}

impl ActivitySpan {
    /// Span of the positive scores within `[from, to]`; the peak is the
    /// earliest day with the maximal score.
    pub fn within(scores: &BTreeMap<NaiveDate, f64>, from: NaiveDate, to: NaiveDate) -> Option<Self> {
        let mut span: Option<(ActivitySpan, f64)> = None;
        for (&d, &s) in scores.range(from..=to).filter(|(_, &s)| s > 0.0) {
            span = Some(match span {
                None => (
                    ActivitySpan {
                        start: d,
                        peak: d,
                        end: d,
                    },
                    s,
                ),
                Some((mut sp, best)) => {
                    sp.end = d;
                    if s > best {
                        sp.peak = d;
                        (sp, s)
                    } else {
                        (sp, best)
                    }
                }
            });
        }
        span.map(|(sp, _)| sp)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDelayStats {
    pub channel_x: String,
    pub channel_y: String,
    pub mean_start_delay: f64,
    pub mean_peak_delay: f64,
    pub mean_end_delay: f64,
    pub topics: usize,
}

/// Mean (x − y) day differences of start, peak and end over topics seen in
/// both channels. Positive values mean channel x is slower.
pub fn channel_delays(
    channel_x: &str,
    channel_y: &str,
    pairs: &[(ActivitySpan, ActivitySpan)],
) -> Result<ChannelDelayStats> {
    if pairs.is_empty() {
        return Err(Error::NoCommonTopics(channel_x.into(), channel_y.into()));
    }
    let n = pairs.len() as f64;
    let mean = |f: fn(&ActivitySpan) -> NaiveDate| {
        pairs
            .iter()
            .map(|(x, y)| (f(x) - f(y)).num_days() as f64)
            .sum::<f64>()
            / n
    };
    Ok(ChannelDelayStats {
        channel_x: channel_x.into(),
        channel_y: channel_y.into(),
        mean_start_delay: mean(|s| s.start),
        mean_peak_delay: mean(|s| s.peak),
        mean_end_delay: mean(|s| s.end),
        topics: pairs.len(),
    })
}

/// Maps feed identifiers onto coarser sources (e.g. several news feeds onto
/// one search engine). Unmapped feeds stand for themselves.
#[derive(Debug, Clone, Default)]
pub struct ChannelGroups(BTreeMap<String, String>);

impl ChannelGroups {
    pub fn new(map: BTreeMap<String, String>) -> Self {
        ChannelGroups(map)
    }

    pub fn source<'a>(&'a self, feed: &'a str) -> &'a str {
        self.0.get(feed).map_or(feed, String::as_str)
    }

    /// A cluster's daily scores summed per source.
    pub fn grouped_scores(&self, cluster: &TopicCluster) -> BTreeMap<String, BTreeMap<NaiveDate, f64>> {
        let mut out: BTreeMap<String, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
        for (feed, scores) in &cluster.channel_scores {
            let target = out.entry(self.source(feed).to_string()).or_default();
            for (&d, &s) in scores {
                *target.entry(d).or_insert(0.0) += s;
            }
        }
        out
    }

    pub fn sources(&self, clusters: &[TopicCluster]) -> BTreeSet<String> {
        clusters
            .iter()
            .flat_map(|c| c.channel_scores.keys())
            .map(|f| self.source(f).to_string())
            .collect()
    }
}

/// Start/peak/end pairs for every (cluster sequence) active in both sources.
pub fn channel_spans(
    clusters: &[TopicCluster],
    groups: &ChannelGroups,
    x: &str,
    y: &str,
) -> Vec<(ActivitySpan, ActivitySpan)> {
    let mut pairs = Vec::new();
    for cluster in clusters {
        let grouped = groups.grouped_scores(cluster);
        let (Some(sx), Some(sy)) = (grouped.get(x), grouped.get(y)) else {
            continue;
        };
        for seq in split_sequences(cluster) {
            if let (Some(a), Some(b)) = (
                ActivitySpan::within(sx, seq.start, seq.end),
                ActivitySpan::within(sy, seq.start, seq.end),
            ) {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

/// Delay tables for every unordered pair of sources; pairs without common
/// topics are skipped.
pub fn all_channel_delays(clusters: &[TopicCluster], groups: &ChannelGroups) -> Vec<ChannelDelayStats> {
    let sources: Vec<String> = groups.sources(clusters).into_iter().collect();
    let mut out = Vec::new();
    for (i, x) in sources.iter().enumerate() {
        for y in &sources[i + 1..] {
            if let Ok(stats) = channel_delays(x, y, &channel_spans(clusters, groups, x, y)) {
                out.push(stats);
            }
        }
    }
    out
}

/// Normalized category mass for one channel: each cluster's score goes to
/// every one of its categories, then the totals are scaled to sum to one.
/// Clusters without categories are left out.
pub fn category_distribution<'a, I>(channel: &str, clusters: I) -> Result<BTreeMap<String, f64>>
where
    I: IntoIterator<Item = (f64, &'a BTreeSet<String>)>,
{
    let mut mass: BTreeMap<String, f64> = BTreeMap::new();
    for (score, categories) in clusters {
        for c in categories {
            *mass.entry(c.clone()).or_insert(0.0) += score;
        }
    }
    let total: f64 = mass.values().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::ZeroMass(channel.into()));
    }
    for v in mass.values_mut() {
        *v /= total;
    }
    Ok(mass)
}

/// Category distributions for every source in `groups`, using cluster labels
/// looked up in `labels`.
pub fn channel_category_distributions(
    clusters: &[TopicCluster],
    groups: &ChannelGroups,
    labels: &BTreeMap<String, BTreeSet<String>>,
) -> BTreeMap<String, BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for source in groups.sources(clusters) {
        let scored: Vec<(f64, &BTreeSet<String>)> = clusters
            .iter()
            .filter_map(|c| {
                let cats = labels.get(&c.label)?;
                let score: f64 = groups
                    .grouped_scores(c)
                    .get(&source)
                    .map_or(0.0, |s| s.values().sum());
                Some((score, cats))
            })
            .collect();
        match category_distribution(&source, scored) {
            Ok(dist) => {
                out.insert(source, dist);
            }
            Err(e) => log::warn!("{e}; skipping its category distribution"),
        }
    }
    out
}

/// Histogram of sequence lifetimes (days → count) per source, plus `all`.
pub fn lifetime_histograms(
    clusters: &[TopicCluster],
    groups: &ChannelGroups,
) -> BTreeMap<String, BTreeMap<i64, u64>> {
    let mut out: BTreeMap<String, BTreeMap<i64, u64>> = BTreeMap::new();
    for c in clusters {
        for seq in split_sequences(c) {
            *out.entry("all".into()).or_default().entry(seq.lifetime()).or_default() += 1;
        }
        for (source, scores) in groups.grouped_scores(c) {
            for (start, end, _) in super::sequences::split_dated(&scores) {
                let days = (end - start).num_days() + 1;
                *out.entry(source.clone()).or_default().entry(days).or_default() += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Days;

    fn d(n: u64) -> NaiveDate {
        NaiveDate::from_ymd_opt(2012, 1, 1).unwrap() + Days::new(n)
    }

    fn span(start: u64, peak: u64, end: u64) -> ActivitySpan {
        ActivitySpan {
            start: d(start),
            peak: d(peak),
            end: d(end),
        }
    }

    #[test]
    fn start_delay_is_a_difference() {
        let s = channel_delays("x", "y", &[(span(5, 6, 7), span(3, 6, 7))]).unwrap();
        assert_eq!(
            (s.mean_start_delay, s.mean_peak_delay, s.mean_end_delay),
            (2.0, 0.0, 0.0)
        );
    }

    #[test]
    fn identical_timelines_have_no_delay() {
        let s = channel_delays("x", "y", &[(span(1, 2, 3), span(1, 2, 3))]).unwrap();
        assert_eq!(
            (s.mean_start_delay, s.mean_peak_delay, s.mean_end_delay),
            (0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn delays_are_averaged() {
        let pairs = [(span(4, 4, 4), span(3, 3, 3)), (span(1, 1, 1), span(4, 4, 4))];
        assert_eq!(channel_delays("x", "y", &pairs).unwrap().mean_start_delay, -1.0);
    }

    #[test]
    fn no_common_topics_is_an_error() {
        assert!(matches!(channel_delays("x", "y", &[]), Err(Error::NoCommonTopics(..))));
    }

    #[test]
    fn peak_ties_take_the_earliest_day() {
        let scores = BTreeMap::from([(d(1), 2.0), (d(2), 5.0), (d(3), 5.0), (d(4), 1.0)]);
        assert_eq!(ActivitySpan::within(&scores, d(0), d(9)), Some(span(1, 2, 4)));
    }

    fn cats(c: &[&str]) -> BTreeSet<String> {
        c.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn single_category_gets_all_mass() {
        let sports = cats(&["sports"]);
        let dist = category_distribution("g", [(10.0, &sports)]).unwrap();
        assert_eq!(dist, BTreeMap::from([("sports".to_string(), 1.0)]));
    }

    #[test]
    fn multi_category_scores_are_duplicated() {
        let a = cats(&["sports"]);
        let b = cats(&["death", "celebrity"]);
        let dist = category_distribution("g", [(6.0, &a), (4.0, &b)]).unwrap();
        assert_eq!(dist["sports"], 6.0 / 14.0);
        assert_eq!(dist["death"], 4.0 / 14.0);
        assert_eq!(dist["celebrity"], 4.0 / 14.0);
        assert!((dist.values().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn empty_channel_is_an_error() {
        assert!(matches!(
            category_distribution("g", std::iter::empty()),
            Err(Error::ZeroMass(_))
        ));
    }
}
