//! Parsing and daily aggregation of hourly `pagecounts` dumps.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use chrono::{Days, NaiveDate};
use flate2::read::MultiGzDecoder;
use percent_encoding::percent_decode_str;
use serde::{Deserialize, Serialize};

use super::{fill_gaps_linear, SeriesStore};
use crate::{par, Error, Result};

/// One line of an hourly dump: `project title count bytes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageviewRecord {
    pub project: String,
    pub title: String,
    pub views: u64,
    pub bytes: u64,
}

/// Percent-decodes a raw title and normalizes spaces to underscores.
///
/// Runs of spaces/underscores collapse to one underscore and are stripped at
/// both ends, so `"Super Bowl"`, `"Super_Bowl"` and `"Super%20Bowl"` coincide.
pub fn canonical_title(raw: &str) -> String {
    let decoded = percent_decode_str(raw).decode_utf8_lossy();
    let mut out = String::with_capacity(decoded.len());
    let mut pending_sep = false;
    for ch in decoded.chars() {
        if ch == '_' || ch.is_whitespace() {
            pending_sep = !out.is_empty();
        } else {
            if pending_sep {
                out.push('_');
                pending_sep = false;
            }
            out.push(ch);
        }
    }
    out
}

/// Parses one dump line. Returns `None` for lines that do not have exactly
/// four fields, carry a non-numeric count, or decode to an empty title.
pub fn parse_pagecount_line(line: &str) -> Option<PageviewRecord> {
    let mut fields = line.split_ascii_whitespace();
    let (project, title, views, bytes) =
        (fields.next()?, fields.next()?, fields.next()?, fields.next()?);
    if fields.next().is_some() {
        return None;
    }
    let views = views.parse().ok()?;
    let bytes = bytes.parse().ok()?;
    let title = canonical_title(title);
    if title.is_empty() {
        return None;
    }
    Some(PageviewRecord {
        project: project.to_string(),
        title,
        views,
        bytes,
    })
}

/// Extracts date and hour from a `pagecounts-YYYYMMDD-HHMMSS[.gz]` file name.
pub fn parse_dump_file_name(path: &Path) -> Option<(NaiveDate, u32)> {
    let name = path.file_name()?.to_str()?;
    let stem = name.strip_suffix(".gz").unwrap_or(name);
    let rest = stem.strip_prefix("pagecounts-")?;
    let (date, time) = rest.split_once('-')?;
    if date.len() != 8 || time.len() != 6 {
        return None;
    }
    let date = NaiveDate::parse_from_str(date, "%Y%m%d").ok()?;
    let hour: u32 = time[..2].parse().ok()?;
    (hour < 24).then_some((date, hour))
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    /// Days whose summed views fall strictly below this are treated as missing.
    pub min_daily_views: u64,
    /// Project codes to keep; `None` keeps every project.
    pub projects: Option<BTreeSet<String>>,
    /// Declared date range; defaults to the span of the input file names.
    pub range: Option<(NaiveDate, NaiveDate)>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            min_daily_views: 25,
            projects: None,
            range: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub files: u64,
    pub lines: u64,
    pub malformed_lines: u64,
    /// Records from projects outside the filter.
    pub filtered_records: u64,
    /// Records dated outside the declared range.
    pub rejected_records: u64,
    pub retained_days: u64,
    /// (article, day) pairs below the daily threshold.
    pub dropped_days: u64,
    /// Articles with no day at or above the threshold.
    pub dropped_articles: u64,
}

impl IngestStats {
    fn absorb(&mut self, other: &IngestStats) {
        self.files += other.files;
        self.lines += other.lines;
        self.malformed_lines += other.malformed_lines;
        self.filtered_records += other.filtered_records;
        self.rejected_records += other.rejected_records;
        self.retained_days += other.retained_days;
        self.dropped_days += other.dropped_days;
        self.dropped_articles += other.dropped_articles;
    }
}

/// Per-(article, day) hourly sums. Merging is a commutative, associative sum,
/// so partial accumulators can be built independently and combined in any
/// order.
#[derive(Debug, Clone)]
pub struct DailyAccumulator {
    first: NaiveDate,
    last: NaiveDate,
    sums: HashMap<String, HashMap<u32, u64>>,
    stats: IngestStats,
}

impl DailyAccumulator {
    pub fn new(first: NaiveDate, last: NaiveDate) -> Self {
        DailyAccumulator {
            first,
            last,
            sums: HashMap::new(),
            stats: IngestStats::default(),
        }
    }

    /// Adds one hourly record. Records outside the declared range (or with an
    /// invalid hour) are rejected, counted and reported via `log`.
    pub fn add(&mut self, date: NaiveDate, hour: u32, record: &PageviewRecord) -> bool {
        if date < self.first || date > self.last || hour > 23 {
            self.stats.rejected_records += 1;
            log::debug!(
                "rejected record for `{}` at {date} {hour:02}h: outside {}..={}",
                record.title,
                self.first,
                self.last
            );
            return false;
        }
        let day = (date - self.first).num_days() as u32;
        *self
            .sums
            .entry(record.title.clone())
            .or_default()
            .entry(day)
            .or_default() += record.views;
        true
    }

    pub fn stats(&self) -> &IngestStats {
        &self.stats
    }

    pub fn merge(mut self, other: DailyAccumulator) -> DailyAccumulator {
        debug_assert_eq!((self.first, self.last), (other.first, other.last));
        let (mut big, small) = if self.sums.len() >= other.sums.len() {
            (std::mem::take(&mut self.sums), other.sums)
        } else {
            (other.sums, std::mem::take(&mut self.sums))
        };
        for (title, days) in small {
            let target = big.entry(title).or_default();
            for (day, views) in days {
                *target.entry(day).or_default() += views;
            }
        }
        self.sums = big;
        self.stats.absorb(&other.stats);
        self
    }

    /// Applies the daily threshold and gap filling and builds the store.
    pub fn finalize(self, min_daily_views: u64) -> Result<(SeriesStore, IngestStats)> {
        let mut store = SeriesStore::new(self.first, self.last)?;
        let mut stats = self.stats;
        let mut titles: Vec<(String, HashMap<u32, u64>)> = self.sums.into_iter().collect();
        titles.sort_unstable_by(|a, b| a.0.cmp(&b.0));

        for (title, days) in titles {
            let recorded = days.len();
            let mut kept: Vec<(u32, u64)> = days
                .into_iter()
                .filter(|&(_, views)| views >= min_daily_views)
                .collect();
            stats.dropped_days += (recorded - kept.len()) as u64;
            if kept.is_empty() {
                stats.dropped_articles += 1;
                continue;
            }
            kept.sort_unstable();
            let lo = kept[0].0;
            let hi = kept[kept.len() - 1].0;
            let mut slots = vec![None; (hi - lo + 1) as usize];
            for &(day, views) in &kept {
                slots[(day - lo) as usize] = Some(views as f64);
            }
            stats.retained_days += kept.len() as u64;
            let start = self.first + Days::new(lo as u64);
            store.insert(fill_gaps_linear(title, start, &slots)?)?;
        }
        Ok((store, stats))
    }
}

/// Aggregates a stream of dated hourly records into a daily store.
pub fn aggregate_daily<I>(
    records: I,
    first: NaiveDate,
    last: NaiveDate,
    min_daily_views: u64,
) -> Result<(SeriesStore, IngestStats)>
where
    I: IntoIterator<Item = (NaiveDate, u32, PageviewRecord)>,
{
    let mut acc = DailyAccumulator::new(first, last);
    for (date, hour, record) in records {
        acc.add(date, hour, &record);
    }
    acc.finalize(min_daily_views)
}

fn open_dump(path: &Path) -> Result<Box<dyn BufRead>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(MultiGzDecoder::new(file))
    } else {
        Box::new(file)
    };
    Ok(Box::new(BufReader::with_capacity(1 << 16, reader)))
}

fn ingest_one(
    path: &Path,
    date: NaiveDate,
    hour: u32,
    range: (NaiveDate, NaiveDate),
    projects: Option<&BTreeSet<String>>,
) -> Result<DailyAccumulator> {
    let mut acc = DailyAccumulator::new(range.0, range.1);
    acc.stats.files = 1;
    let mut reader = open_dump(path)?;
    let mut buf = Vec::with_capacity(256);
    loop {
        buf.clear();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        let line = String::from_utf8_lossy(&buf);
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        acc.stats.lines += 1;
        let Some(record) = parse_pagecount_line(line) else {
            acc.stats.malformed_lines += 1;
            continue;
        };
        if projects.is_some_and(|p| !p.contains(&record.project)) {
            acc.stats.filtered_records += 1;
            continue;
        }
        acc.add(date, hour, &record);
    }
    Ok(acc)
}

/// Parses dump files concurrently and folds them into one store.
pub fn ingest_files(
    paths: &[PathBuf],
    options: &IngestOptions,
) -> Result<(SeriesStore, IngestStats)> {
    let mut dated = Vec::with_capacity(paths.len());
    for path in paths {
        let (date, hour) = parse_dump_file_name(path).ok_or_else(|| {
            Error::format(
                "dump file name",
                format!("{} (expected pagecounts-YYYYMMDD-HHMMSS.gz)", path.display()),
            )
        })?;
        dated.push((path.clone(), date, hour));
    }
    let range = match options.range {
        Some(r) => r,
        None => {
            let first = dated.iter().map(|d| d.1).min();
            let last = dated.iter().map(|d| d.1).max();
            match (first, last) {
                (Some(f), Some(l)) => (f, l),
                _ => return Err(Error::EmptyInput("no dump files given".into())),
            }
        }
    };

    let partials = par::map(&dated, |(path, date, hour)| {
        ingest_one(path, *date, *hour, range, options.projects.as_ref())
    });
    let mut acc = DailyAccumulator::new(range.0, range.1);
    for partial in partials {
        acc = acc.merge(partial?);
    }
    acc.finalize(options.min_daily_views)
}
