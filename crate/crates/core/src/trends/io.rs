//! Delimited-text readers and writers for feeds, clusters and their
//! derived tables. Every file carries a header row.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::analytics::ChannelDelayStats;
use super::text::normalize_topic;
use super::{global_trend_score, ClusterId, RawTrendEntry, TopicCluster, TrendSequence};
use crate::{Error, Result};

fn reader(path: &Path, headers: bool) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(headers)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

pub(crate) fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

/// Reads `date,channel,rank,topic` lines. A leading header row is optional;
/// topics may contain commas when quoted (or as trailing fields).
pub fn read_feeds(path: &Path) -> Result<Vec<RawTrendEntry>> {
    let mut out = Vec::new();
    for (line, rec) in reader(path, false)?.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        if line == 0 && rec.get(0) == Some("date") {
            continue;
        }
        let bad = |detail: &str| {
            Error::format(
                "feed line",
                format!("{}:{}: {detail}", path.display(), line + 1),
            )
        };
        if rec.len() < 4 {
            return Err(bad("expected date,channel,rank,topic"));
        }
        let date = NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d").map_err(|_| bad("bad date"))?;
        let rank: u32 = rec[2].parse().map_err(|_| bad("bad rank"))?;
        if rank == 0 {
            return Err(bad("ranks are 1-based"));
        }
        let topic = rec.iter().skip(3).collect::<Vec<_>>().join(",");
        if topic.trim().is_empty() {
            return Err(bad("empty topic"));
        }
        out.push(RawTrendEntry {
            date,
            channel: rec[1].to_string(),
            rank,
            topic,
        });
    }
    Ok(out)
}

pub fn write_feeds(path: &Path, entries: &[RawTrendEntry]) -> Result<()> {
    let mut w = writer(path)?;
    let io = |e| Error::csv(path, e);
    w.write_record(["date", "channel", "rank", "topic"]).map_err(io)?;
    for e in entries {
        w.serialize((e.date, &e.channel, e.rank, &e.topic)).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Serialize, Deserialize)]
struct ClusterRow {
    id: ClusterId,
    label: String,
    uri: String,
    global_score: f64,
    members: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct ScoreRow {
    cluster_id: ClusterId,
    date: NaiveDate,
    channel: String,
    score: f64,
}

/// Writes `clusters.csv`-style rows and the per-feed daily scores.
pub fn write_clusters(clusters_path: &Path, scores_path: &Path, clusters: &[TopicCluster]) -> Result<()> {
    let mut w = writer(clusters_path)?;
    for c in clusters {
        w.serialize(ClusterRow {
            id: c.id,
            label: c.label.clone(),
            uri: c.uri.clone().unwrap_or_default(),
            global_score: global_trend_score(c),
            members: c.members.iter().cloned().collect::<Vec<_>>().join("|"),
        })
        .map_err(|e| Error::csv(clusters_path, e))?;
    }
    w.flush().map_err(|e| Error::io(clusters_path, e))?;

    let mut w = writer(scores_path)?;
    for c in clusters {
        for (channel, scores) in &c.channel_scores {
            for (&date, &score) in scores {
                w.serialize(ScoreRow {
                    cluster_id: c.id,
                    date,
                    channel: channel.clone(),
                    score,
                })
                .map_err(|e| Error::csv(scores_path, e))?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(scores_path, e))
}

pub fn read_clusters(clusters_path: &Path, scores_path: &Path) -> Result<Vec<TopicCluster>> {
    let mut clusters = Vec::new();
    let mut by_id = BTreeMap::new();
    for row in reader(clusters_path, true)?.deserialize::<ClusterRow>() {
        let row = row.map_err(|e| Error::csv(clusters_path, e))?;
        by_id.insert(row.id, clusters.len());
        clusters.push(TopicCluster {
            id: row.id,
            label: row.label,
            members: row.members.split('|').map(str::to_string).collect(),
            uri: (!row.uri.is_empty()).then_some(row.uri),
            daily_scores: BTreeMap::new(),
            channel_scores: BTreeMap::new(),
        });
    }
    for row in reader(scores_path, true)?.deserialize::<ScoreRow>() {
        let row = row.map_err(|e| Error::csv(scores_path, e))?;
        let &i = by_id.get(&row.cluster_id).ok_or_else(|| {
            Error::format(
                "score row",
                format!("unknown cluster id {} in {}", row.cluster_id, scores_path.display()),
            )
        })?;
        let c = &mut clusters[i];
        *c.daily_scores.entry(row.date).or_insert(0.0) += row.score;
        *c.channel_scores
            .entry(row.channel)
            .or_default()
            .entry(row.date)
            .or_insert(0.0) += row.score;
    }
    Ok(clusters)
}

/// One row of the trend ranking (the general topic pool).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub rank: u32,
    pub cluster_id: ClusterId,
    pub label: String,
    pub uri: String,
    pub global_score: f64,
}

pub fn write_ranking(path: &Path, rows: &[RankRow]) -> Result<()> {
    let mut w = writer(path)?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_ranking(path: &Path) -> Result<Vec<RankRow>> {
    reader(path, true)?
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::csv(path, e))
}

/// A trend sequence as exchanged between the pipeline and the backtest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRow {
    pub sequence_id: u32,
    pub cluster_id: ClusterId,
    pub label: String,
    pub uri: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub lifetime: i64,
    pub total_score: f64,
}

impl SequenceRow {
    pub fn from_sequence(id: u32, cluster: &TopicCluster, seq: &TrendSequence) -> Self {
        SequenceRow {
            sequence_id: id,
            cluster_id: cluster.id,
            label: cluster.label.clone(),
            uri: cluster.uri.clone().unwrap_or_default(),
            start: seq.start,
            end: seq.end,
            lifetime: seq.lifetime(),
            total_score: seq.total_score(),
        }
    }
}

pub fn write_sequences(path: &Path, rows: &[SequenceRow]) -> Result<()> {
    let mut w = writer(path)?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_sequences(path: &Path) -> Result<Vec<SequenceRow>> {
    reader(path, true)?
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::csv(path, e))
}

pub fn write_delays(path: &Path, delays: &[ChannelDelayStats]) -> Result<()> {
    let mut w = writer(path)?;
    let io = |e| Error::csv(path, e);
    w.write_record(["channel_x", "channel_y", "topics", "mean_start_delay", "mean_peak_delay", "mean_end_delay"])
        .map_err(io)?;
    for d in delays {
        w.serialize((
            &d.channel_x,
            &d.channel_y,
            d.topics,
            d.mean_start_delay,
            d.mean_peak_delay,
            d.mean_end_delay,
        ))
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_category_distributions(
    path: &Path,
    dists: &BTreeMap<String, BTreeMap<String, f64>>,
) -> Result<()> {
    let mut w = writer(path)?;
    let io = |e| Error::csv(path, e);
    w.write_record(["channel", "category", "share"]).map_err(io)?;
    for (channel, dist) in dists {
        for (category, share) in dist {
            w.serialize((channel, category, share)).map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_lifetimes(path: &Path, hists: &BTreeMap<String, BTreeMap<i64, u64>>) -> Result<()> {
    let mut w = writer(path)?;
    let io = |e| Error::csv(path, e);
    w.write_record(["channel", "lifetime", "count"]).map_err(io)?;
    for (channel, hist) in hists {
        for (days, count) in hist {
            w.serialize((channel, days, count)).map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `clusterLabel,category` lines; labels are normalized like topics.
pub fn read_labels(path: &Path) -> Result<BTreeMap<String, BTreeSet<String>>> {
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (line, rec) in reader(path, false)?.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        if rec.len() < 2 || (line == 0 && &rec[0] == "clusterLabel") {
            continue;
        }
        out.entry(normalize_topic(&rec[0]))
            .or_default()
            .insert(rec[1].to_string());
    }
    Ok(out)
}

/// `feed,source` lines.
pub fn read_channel_groups(path: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (line, rec) in reader(path, false)?.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        if rec.len() < 2 || (line == 0 && &rec[0] == "feed") {
            continue;
        }
        out.insert(rec[0].to_string(), rec[1].to_string());
    }
    Ok(out)
}
