//! `trendcast`: ingest page-view dumps, cluster trend feeds, find semantic
//! neighbours, forecast and backtest.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "trendcast", version, about = "Forecast trending topics from page-view history")]
struct Cli {
    /// Worker threads for ingestion, candidate scans and backtests
    /// (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// `key = value` file with forecast settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Aggregate hourly dump files into a daily series store.
    Ingest(IngestArgs),
    /// Cluster trend feed entries into scored topic clusters.
    Cluster(ClusterArgs),
    /// Rank clusters by global score.
    Rank(RankArgs),
    /// Split cluster scores into trend sequences, with feed analytics.
    Sequences(SequencesArgs),
    /// List the candidate topic pool of each topic.
    Neighbors(NeighborsArgs),
    /// Forecast the next days of one or more topics.
    Forecast(ForecastArgs),
    /// Backtest methods on trend sequences.
    Evaluate(EvaluateArgs),
    /// Turn an evaluation report into `tau,method,mape` plot data.
    Plotdata(PlotArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Dump files or directories holding `pagecounts-YYYYMMDD-HHMMSS[.gz]`.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Output directory for `store.tcs` and `manifest.json`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 25)]
    min_daily_views: u64,
    /// Project code to keep; repeatable. `all` keeps every project.
    #[arg(long, default_values_t = vec!["en".to_string()])]
    project: Vec<String>,
    /// First day of the store (default: earliest file).
    #[arg(long)]
    from: Option<chrono::NaiveDate>,
    /// Last day of the store (default: latest file).
    #[arg(long)]
    to: Option<chrono::NaiveDate>,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    /// Feed file `date,channel,rank,topic`.
    #[arg(long)]
    feeds: PathBuf,
    /// Store whose article titles resolve topics to uris.
    #[arg(long)]
    store: Option<PathBuf>,
    /// Relative edit-distance threshold.
    #[arg(long, default_value_t = trendcast::trends::CLUSTER_FACTOR)]
    threshold: f64,
    /// Output directory for `clusters.csv` and `cluster_scores.csv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RankArgs {
    /// Directory written by `cluster`.
    #[arg(long)]
    clusters: PathBuf,
    /// Keep the best N clusters (default: all).
    #[arg(long)]
    top: Option<usize>,
    /// Also write per-feed category shares using `label,category` lines.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// `feed,source` lines merging feeds before per-feed statistics.
    #[arg(long)]
    channel_groups: Option<PathBuf>,
    /// Output directory for `ranking.csv` (and `categories.csv`).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SequencesArgs {
    /// Directory written by `cluster`.
    #[arg(long)]
    clusters: PathBuf,
    /// `feed,source` lines merging feeds before delay statistics.
    #[arg(long)]
    channel_groups: Option<PathBuf>,
    /// Output directory for `sequences.csv`, `delays.csv` and `lifetimes.csv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Clone)]
struct PoolArgs {
    /// N-Triples files with category and type assertions (`.gz` allowed).
    #[arg(long)]
    triples: Vec<PathBuf>,
    /// Ranking written by `rank`; its uris form the general pool.
    #[arg(long)]
    ranking: Option<PathBuf>,
    /// Maximum number of semantic neighbours.
    #[arg(long, default_value_t = trendcast::semantic::SIMILAR_LIMIT)]
    limit: usize,
}

#[derive(Debug, Args)]
struct NeighborsArgs {
    /// Topic uri; repeatable.
    #[arg(long, required = true)]
    topic: Vec<String>,
    #[arg(long = "topic-set", default_value = "sim")]
    topic_set: String,
    #[command(flatten)]
    pool: PoolArgs,
    /// Output directory for `topic_sets.csv`.
    #[arg(long)]
    out: PathBuf,
}

/// Forecast settings; unset flags fall back to the config file, then defaults.
#[derive(Debug, Args, Clone, Default)]
struct ForecastFlags {
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    /// euclidean, musigma or y_invariant.
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    /// median or average.
    #[arg(long)]
    combine: Option<String>,
    /// Rescale neighbours to the history's last value (`--scaled false` to disable).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    scaled: Option<bool>,
    #[arg(long)]
    min_shift_separation: Option<usize>,
}

#[derive(Debug, Args)]
struct ForecastArgs {
    #[arg(long)]
    store: PathBuf,
    /// Topic uri; repeatable.
    #[arg(long, required = true)]
    topic: Vec<String>,
    /// First forecast day as a date or day index (default: the day after the store ends).
    #[arg(long)]
    t0: Option<String>,
    /// self, gen or sim.
    #[arg(long = "topic-set")]
    topic_set: Option<String>,
    #[command(flatten)]
    pool: PoolArgs,
    #[command(flatten)]
    flags: ForecastFlags,
    /// Output directory for `forecast.csv` and `forecast_neighbors.csv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    store: PathBuf,
    /// Sequence file written by `sequences`.
    #[arg(long)]
    sequences: PathBuf,
    /// Comma-separated method names, e.g. `naive,nn/median_scaled/sim`.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    /// `label,category` lines for the per-category report.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[command(flatten)]
    pool: PoolArgs,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    outlier_fraction: f64,
    /// Also evaluate the oracle on this pool (self, gen or sim).
    #[arg(long)]
    oracle: Option<String>,
    /// Output directory for `report.csv` and `report_categories.csv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Report written by `evaluate`.
    #[arg(long)]
    report: PathBuf,
    /// Output directory for `plot.csv`.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
