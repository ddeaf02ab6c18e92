use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use chrono::NaiveDate;
use log::info;

use trendcast::eval::{self, EvalOptions, EvalSequence, Family, MethodId};
use trendcast::forecast::{self, parse_key_values, ForecastConfig};
use trendcast::semantic::{self, build_topic_set, load_ntriples, PredicateConfig, SemanticIndex, TopicSet, TopicSetKind};
use trendcast::store::{self, ingest_files, parse_dump_file_name, IngestOptions, SeriesStore, StoreManifest};
use trendcast::trends::{self, analytics, io as tio, normalize_topic, ChannelGroups, TitleIndex};

use crate::{Cli, Command, ForecastFlags, PoolArgs};

/// Errors in how the command was called, as opposed to failures while running it.
#[derive(Debug)]
pub enum UsageError {
    MissingInput(PathBuf),
    Invalid(String),
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UsageError::MissingInput(p) => write!(f, "input not found: {}", p.display()),
            UsageError::Invalid(m) => write!(f, "invalid arguments: {m}"),
        }
    }
}

impl std::error::Error for UsageError {}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<UsageError>() {
        Some(UsageError::Invalid(_)) => 2,
        Some(UsageError::MissingInput(_)) => 3,
        None => 1,
    }
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    UsageError::Invalid(msg.into()).into()
}

fn require(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(UsageError::MissingInput(path.to_path_buf()).into())
    }
}

fn out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// A store file, or a directory written by `ingest`.
fn load_store(path: &Path) -> Result<SeriesStore> {
    require(path)?;
    let file = if path.is_dir() { path.join("store.tcs") } else { path.to_path_buf() };
    require(&file)?;
    Ok(store::read_store(&file)?)
}

/// Forecast settings from the config file, plus keys the forecaster does not know.
fn load_config(path: Option<&Path>) -> Result<(ForecastConfig, BTreeMap<String, String>)> {
    let mut config = ForecastConfig::default();
    let mut extra = BTreeMap::new();
    if let Some(path) = path {
        require(path)?;
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        for (k, v) in parse_key_values(&text).with_context(|| format!("in {}", path.display()))? {
            if !config.apply(&k, &v).map_err(|e| invalid(format!("{}: {e}", path.display())))? {
                extra.insert(k, v);
            }
        }
    }
    Ok((config, extra))
}

fn apply_flags(config: &mut ForecastConfig, flags: &ForecastFlags) -> Result<()> {
    if let Some(h) = flags.horizon {
        config.horizon = h;
    }
    if let Some(w) = flags.window {
        config.window = w;
    }
    if let Some(m) = &flags.metric {
        config.metric = m.parse().map_err(|e: trendcast::Error| invalid(e.to_string()))?;
    }
    if let Some(k) = flags.k {
        config.k = k;
    }
    if let Some(c) = &flags.combine {
        config.combine = c.parse().map_err(|e: trendcast::Error| invalid(e.to_string()))?;
    }
    if let Some(s) = flags.scaled {
        config.scaled = s;
    }
    if let Some(s) = flags.min_shift_separation {
        config.min_shift_separation = Some(s);
    }
    config.validate().map_err(|e| invalid(e.to_string()))
}

fn parse_t0(value: Option<&str>, store: &SeriesStore) -> Result<i64> {
    let Some(value) = value else {
        return Ok(store.num_days());
    };
    if let Ok(date) = NaiveDate::parse_from_str(value, "%Y-%m-%d") {
        return Ok(store.day_index(date));
    }
    value
        .parse::<i64>()
        .map_err(|_| invalid(format!("--t0 `{value}` is neither a date nor a day index")))
}

fn parse_kind(value: &str) -> Result<TopicSetKind> {
    value.parse().map_err(|e: trendcast::Error| invalid(e.to_string()))
}

/// Semantic index and general pool, loaded only when a pool kind needs them.
struct Pools {
    index: Option<SemanticIndex>,
    general: Vec<String>,
    limit: usize,
}

impl Pools {
    fn load(args: &PoolArgs, kinds: &BTreeSet<TopicSetKind>) -> Result<Self> {
        let index = if kinds.contains(&TopicSetKind::Similar) {
            if args.triples.is_empty() {
                return Err(invalid("the sim topic set needs --triples"));
            }
            for p in &args.triples {
                require(p)?;
            }
            let (index, stats) = load_ntriples(&args.triples, &PredicateConfig::default())?;
            info!("loaded {} triples ({} malformed)", stats.accepted, stats.malformed);
            Some(index)
        } else {
            None
        };
        let general = if kinds.contains(&TopicSetKind::General) {
            let path = args
                .ranking
                .as_ref()
                .ok_or_else(|| invalid("the gen topic set needs --ranking"))?;
            require(path)?;
            tio::read_ranking(path)?
                .into_iter()
                .filter(|r| !r.uri.is_empty())
                .map(|r| r.uri)
                .collect()
        } else {
            Vec::new()
        };
        Ok(Pools {
            index,
            general,
            limit: args.limit,
        })
    }

    fn set(&self, kind: TopicSetKind, topic: &str) -> TopicSet {
        let empty = SemanticIndex::default();
        build_topic_set(kind, topic, self.index.as_ref().unwrap_or(&empty), &self.general, self.limit)
    }
}

pub fn run(cli: Cli) -> Result<String> {
    if cli.workers == Some(0) {
        return Err(invalid("--workers must be at least 1"));
    }
    let config = cli.config.clone();
    trendcast::par::with_workers(cli.workers, move || {
        let config = config.as_deref();
        match cli.command {
            Command::Ingest(a) => ingest(a),
            Command::Cluster(a) => cluster(a),
            Command::Rank(a) => rank(a),
            Command::Sequences(a) => sequences(a),
            Command::Neighbors(a) => neighbors(a),
            Command::Forecast(a) => run_forecast(a, config),
            Command::Evaluate(a) => evaluate(a, config),
            Command::Plotdata(a) => plotdata(a),
        }
    })
}

fn dump_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        require(input)?;
        if input.is_dir() {
            for entry in fs::read_dir(input).with_context(|| format!("listing {}", input.display()))? {
                let path = entry?.path();
                if parse_dump_file_name(&path).is_some() {
                    files.push(path);
                }
            }
        } else {
            files.push(input.clone());
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(invalid("no pagecounts-* dump files among the inputs"));
    }
    Ok(files)
}

fn ingest(a: crate::IngestArgs) -> Result<String> {
    let start = Instant::now();
    let files = dump_files(&a.inputs)?;
    let range = match (a.from, a.to) {
        (Some(f), Some(t)) => Some((f, t)),
        (None, None) => None,
        _ => return Err(invalid("--from and --to go together")),
    };
    let projects = if a.project.iter().any(|p| p == "all") {
        None
    } else {
        Some(a.project.iter().cloned().collect())
    };
    let options = IngestOptions {
        min_daily_views: a.min_daily_views,
        projects,
        range,
    };
    let (store, stats) = ingest_files(&files, &options)?;
    out_dir(&a.out)?;
    store::write_store(&a.out.join("store.tcs"), &store)?;
    let manifest = StoreManifest::describe(&store, stats);
    store::write_manifest(&a.out.join("manifest.json"), &manifest)?;
    Ok(format!(
        "ingest: {} files, {} articles, {}..{}, {} article-days below {} views, {:.2?}",
        manifest.ingest.files,
        manifest.articles,
        manifest.first_date,
        manifest.last_date,
        manifest.ingest.dropped_days,
        a.min_daily_views,
        start.elapsed()
    ))
}

fn cluster(a: crate::ClusterArgs) -> Result<String> {
    require(&a.feeds)?;
    let entries = tio::read_feeds(&a.feeds)?;
    let index = match &a.store {
        Some(p) => Some(TitleIndex::from_store(&load_store(p)?)),
        None => None,
    };
    let clusters = trends::build_clusters(&entries, index.as_ref(), a.threshold)?;
    out_dir(&a.out)?;
    tio::write_clusters(&a.out.join("clusters.csv"), &a.out.join("cluster_scores.csv"), &clusters)?;
    let resolved = clusters.iter().filter(|c| c.uri.is_some()).count();
    Ok(format!(
        "cluster: {} feed entries, {} clusters, {} resolved to articles",
        entries.len(),
        clusters.len(),
        resolved
    ))
}

fn read_cluster_dir(dir: &Path) -> Result<Vec<trends::TopicCluster>> {
    let (c, s) = (dir.join("clusters.csv"), dir.join("cluster_scores.csv"));
    require(&c)?;
    require(&s)?;
    Ok(tio::read_clusters(&c, &s)?)
}

fn channel_groups(path: Option<&Path>) -> Result<ChannelGroups> {
    Ok(ChannelGroups::new(match path {
        Some(p) => {
            require(p)?;
            tio::read_channel_groups(p)?
        }
        None => BTreeMap::new(),
    }))
}

fn rank(a: crate::RankArgs) -> Result<String> {
    let clusters = read_cluster_dir(&a.clusters)?;
    let top = trends::top_clusters(&clusters, a.top.unwrap_or(clusters.len()));
    let rows: Vec<tio::RankRow> = top
        .iter()
        .enumerate()
        .map(|(i, c)| tio::RankRow {
            rank: i as u32 + 1,
            cluster_id: c.id,
            label: c.label.clone(),
            uri: c.uri.clone().unwrap_or_default(),
            global_score: trends::global_trend_score(c),
        })
        .collect();
    out_dir(&a.out)?;
    tio::write_ranking(&a.out.join("ranking.csv"), &rows)?;
    let mut summary = format!("rank: {} of {} clusters ranked", rows.len(), clusters.len());
    if let Some(labels) = &a.labels {
        require(labels)?;
        let labels = tio::read_labels(labels)?;
        let groups = channel_groups(a.channel_groups.as_deref())?;
        let dists = analytics::channel_category_distributions(&clusters, &groups, &labels);
        tio::write_category_distributions(&a.out.join("categories.csv"), &dists)?;
        summary.push_str(&format!(", category shares for {} feeds", dists.len()));
    }
    Ok(summary)
}

fn sequences(a: crate::SequencesArgs) -> Result<String> {
    let clusters = read_cluster_dir(&a.clusters)?;
    let groups = channel_groups(a.channel_groups.as_deref())?;
    let mut rows = Vec::new();
    for c in &clusters {
        for s in trends::split_sequences(c) {
            rows.push(tio::SequenceRow::from_sequence(rows.len() as u32, c, &s));
        }
    }
    out_dir(&a.out)?;
    tio::write_sequences(&a.out.join("sequences.csv"), &rows)?;
    let delays = analytics::all_channel_delays(&clusters, &groups);
    tio::write_delays(&a.out.join("delays.csv"), &delays)?;
    tio::write_lifetimes(&a.out.join("lifetimes.csv"), &analytics::lifetime_histograms(&clusters, &groups))?;
    let mean = rows.iter().map(|r| r.lifetime as f64).sum::<f64>() / rows.len().max(1) as f64;
    Ok(format!(
        "sequences: {} sequences from {} clusters, mean lifetime {mean:.1} days, {} feed pairs",
        rows.len(),
        clusters.len(),
        delays.len()
    ))
}

fn neighbors(a: crate::NeighborsArgs) -> Result<String> {
    let kind = parse_kind(&a.topic_set)?;
    let pools = Pools::load(&a.pool, &BTreeSet::from([kind]))?;
    let sets: Vec<(String, TopicSet)> = a.topic.iter().map(|t| (t.clone(), pools.set(kind, t))).collect();
    out_dir(&a.out)?;
    let empty = SemanticIndex::default();
    semantic::write_topic_sets(&a.out.join("topic_sets.csv"), &sets, pools.index.as_ref().unwrap_or(&empty))?;
    let sizes: Vec<String> = sets.iter().map(|(_, s)| s.members.len().to_string()).collect();
    Ok(format!("neighbors: {kind} pools for {} topics, sizes {}", sets.len(), sizes.join(",")))
}

fn run_forecast(a: crate::ForecastArgs, config_path: Option<&Path>) -> Result<String> {
    let (mut config, extra) = load_config(config_path)?;
    apply_flags(&mut config, &a.flags)?;
    let store = load_store(&a.store)?;
    let t0 = parse_t0(a.t0.as_deref(), &store)?;
    let kind = match a.topic_set.as_deref().or(extra.get("topic_set").map(String::as_str)) {
        Some(k) => parse_kind(k)?,
        None if a.pool.triples.is_empty() => TopicSetKind::Itself,
        None => TopicSetKind::Similar,
    };
    let pools = Pools::load(&a.pool, &BTreeSet::from([kind]))?;
    let forecasts = a
        .topic
        .iter()
        .map(|topic| {
            let set = pools.set(kind, topic);
            forecast::forecast(topic, t0, &set.members, &store, &config)
                .with_context(|| format!("forecasting {topic}"))
        })
        .collect::<Result<Vec<_>>>()?;
    out_dir(&a.out)?;
    forecast::io::write_forecasts(&a.out.join("forecast.csv"), &forecasts, &store)?;
    forecast::io::write_neighbors(&a.out.join("forecast_neighbors.csv"), &forecasts, &store)?;
    Ok(format!(
        "forecast: {} topics x {} days from {} ({}, k={}, w={}, {} {}, {kind} pool)",
        forecasts.len(),
        config.horizon,
        store.date_of(t0),
        config.metric,
        config.k,
        config.window,
        config.combine,
        if config.scaled { "scaled" } else { "unscaled" }
    ))
}

fn evaluate(a: crate::EvaluateArgs, config_path: Option<&Path>) -> Result<String> {
    let start = Instant::now();
    let (config, _) = load_config(config_path)?;
    let store = load_store(&a.store)?;
    require(&a.sequences)?;
    let rows = tio::read_sequences(&a.sequences)?;
    let methods: Vec<MethodId> = if a.methods.is_empty() {
        MethodId::standard_set()
    } else {
        a.methods
            .iter()
            .map(|m| m.parse().map_err(|e: trendcast::Error| invalid(e.to_string())))
            .collect::<Result<_>>()?
    };
    let oracle = a.oracle.as_deref().map(parse_kind).transpose()?;
    let kinds: BTreeSet<TopicSetKind> = methods
        .iter()
        .filter(|m| m.family == Family::Nn)
        .filter_map(|m| m.topic_set)
        .chain(oracle)
        .collect();
    let pools = Pools::load(&a.pool, &kinds)?;
    let labels = match &a.labels {
        Some(p) => {
            require(p)?;
            tio::read_labels(p)?
        }
        None => BTreeMap::new(),
    };
    let sequences: Vec<EvalSequence> = rows
        .iter()
        .map(|r| EvalSequence {
            id: r.sequence_id.to_string(),
            uri: r.uri.clone(),
            trigger: store.day_index(r.start),
            categories: labels
                .get(&normalize_topic(&r.label))
                .map(|c| c.iter().cloned().collect())
                .unwrap_or_default(),
            topic_sets: kinds.iter().map(|&k| (k, pools.set(k, &r.uri).members)).collect(),
        })
        .collect();
    let options = EvalOptions {
        horizon: a.horizon.unwrap_or(config.horizon),
        outlier_fraction: a.outlier_fraction,
        trend_window: config.window,
        oracle: oracle.map(|k| (k, config.clone())),
        ..Default::default()
    };
    let report = eval::moving_window_eval(&sequences, &methods, &store, &options)?;
    out_dir(&a.out)?;
    eval::io::write_report(&a.out.join("report.csv"), &report)?;
    eval::io::write_category_report(&a.out.join("report_categories.csv"), &report)?;
    let best = (0..methods.len())
        .min_by(|&i, &j| report.mean_rmse(i).total_cmp(&report.mean_rmse(j)))
        .map(|i| format!(", best {} (mean rmse {:.1})", methods[i], report.mean_rmse(i)))
        .unwrap_or_default();
    Ok(format!(
        "evaluate: {} sequences ({} skipped), {} methods, h={}{best}, {:.2?}",
        report.sequences.len(),
        report.skipped.len(),
        methods.len(),
        options.horizon,
        start.elapsed()
    ))
}

fn plotdata(a: crate::PlotArgs) -> Result<String> {
    require(&a.report)?;
    let rows = eval::io::read_report(&a.report)?;
    let plot = eval::io::plot_rows(&rows);
    out_dir(&a.out)?;
    eval::io::write_plot(&a.out.join("plot.csv"), &plot)?;
    let methods: BTreeSet<&str> = plot.iter().map(|r| r.method.as_str()).collect();
    Ok(format!("plotdata: {} points for {} methods", plot.len(), methods.len()))
}
