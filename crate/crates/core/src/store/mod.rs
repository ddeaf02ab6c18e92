//! Daily page-view series keyed by canonical article title.
//!
//! Series are contiguous arrays anchored at a store-wide epoch (the first
//! day of the global range). Days outside a series' own span read as zero.

mod gaps;
pub mod ingest;
mod io;

use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};

use crate::{Error, Result};

pub use gaps::fill_gaps_linear;
pub use ingest::{
    aggregate_daily, canonical_title, ingest_files, parse_dump_file_name, parse_pagecount_line,
    DailyAccumulator, IngestOptions, IngestStats, PageviewRecord,
};
pub use io::{read_manifest, read_store, write_manifest, write_store, StoreManifest};

/// One article's gap-free daily view counts.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySeries {
    pub uri: String,
    pub start: NaiveDate,
    pub values: Vec<f64>,
    /// `false` for days whose value was interpolated or zero-filled.
    pub recorded: Vec<bool>,
}

impl DailySeries {
    /// A series where every day counts as recorded.
    pub fn new(uri: impl Into<String>, start: NaiveDate, values: Vec<f64>) -> Self {
        let recorded = vec![true; values.len()];
        DailySeries {
            uri: uri.into(),
            start,
            values,
            recorded,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Last covered day, or `None` for an empty series.
    pub fn end(&self) -> Option<NaiveDate> {
        let n = self.values.len() as u64;
        (n > 0).then(|| self.start + Days::new(n - 1))
    }

    fn offset(&self, date: NaiveDate) -> Option<usize> {
        let d = (date - self.start).num_days();
        (d >= 0 && (d as usize) < self.values.len()).then_some(d as usize)
    }

    /// Value on `date`; zero outside the covered span.
    pub fn value_on(&self, date: NaiveDate) -> f64 {
        self.offset(date).map_or(0.0, |i| self.values[i])
    }

    pub fn is_recorded(&self, date: NaiveDate) -> bool {
        self.offset(date).is_some_and(|i| self.recorded[i])
    }
}

/// Immutable-after-build mapping from article to daily series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesStore {
    first: NaiveDate,
    last: NaiveDate,
    entries: BTreeMap<String, DailySeries>,
}

impl SeriesStore {
    pub fn new(first: NaiveDate, last: NaiveDate) -> Result<Self> {
        if last < first {
            return Err(Error::Config(format!("store range {first}..={last} is empty")));
        }
        Ok(SeriesStore {
            first,
            last,
            entries: BTreeMap::new(),
        })
    }

    /// Builds a store whose day 0 is `first` from plain value vectors.
    pub fn from_values<I, S>(first: NaiveDate, last: NaiveDate, series: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut store = SeriesStore::new(first, last)?;
        for (uri, values) in series {
            store.insert(DailySeries::new(uri, first, values))?;
        }
        Ok(store)
    }

    /// Adds or replaces a series. The series must lie inside the global range
    /// and hold only finite, non-negative values.
    pub fn insert(&mut self, series: DailySeries) -> Result<()> {
        if series.values.len() != series.recorded.len() {
            return Err(Error::LengthMismatch {
                left: series.values.len(),
                right: series.recorded.len(),
            });
        }
        if series.start < self.first {
            return Err(self.out_of_range(series.start));
        }
        if let Some(end) = series.end() {
            if end > self.last {
                return Err(self.out_of_range(end));
            }
        }
        if let Some(bad) = series.values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::format(
                "series",
                format!("`{}` holds invalid value {bad}", series.uri),
            ));
        }
        self.entries.insert(series.uri.clone(), series);
        Ok(())
    }

    pub fn first_date(&self) -> NaiveDate {
        self.first
    }

    pub fn last_date(&self) -> NaiveDate {
        self.last
    }

    /// Number of days in the global range.
    pub fn num_days(&self) -> i64 {
        (self.last - self.first).num_days() + 1
    }

    /// Day index of `date` relative to the first day of the range.
    pub fn day_index(&self, date: NaiveDate) -> i64 {
        (date - self.first).num_days()
    }

    /// Inverse of [`day_index`](Self::day_index).
    pub fn date_of(&self, day: i64) -> NaiveDate {
        if day >= 0 {
            self.first + Days::new(day as u64)
        } else {
            self.first - Days::new(day.unsigned_abs())
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, uri: &str) -> Option<&DailySeries> {
        self.entries.get(uri)
    }

    pub fn contains(&self, uri: &str) -> bool {
        self.entries.contains_key(uri)
    }

    /// Series in lexicographic uri order.
    pub fn iter(&self) -> impl Iterator<Item = &DailySeries> {
        self.entries.values()
    }

    pub fn uris(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Values of `uri` for every day of the global range, zero outside its span.
    pub fn dense(&self, uri: &str) -> Result<Vec<f64>> {
        let series = self.series(uri)?;
        let mut out = vec![0.0; self.num_days() as usize];
        let offset = self.day_index(series.start) as usize;
        out[offset..offset + series.len()].copy_from_slice(&series.values);
        Ok(out)
    }

    /// Value of `uri` on day index `day`; zero outside its span.
    pub fn value(&self, uri: &str, day: i64) -> Result<f64> {
        Ok(self.series(uri)?.value_on(self.date_of(day)))
    }

    /// The `w` values ending at day index `end` (inclusive).
    pub fn window(&self, uri: &str, end: i64, w: usize) -> Result<Vec<f64>> {
        let series = self.series(uri)?;
        if end < 0 || end >= self.num_days() {
            return Err(self.out_of_range(self.date_of(end)));
        }
        let series_start = self.day_index(series.start);
        let from = end - w as i64 + 1;
        Ok((from..=end)
            .map(|day| {
                let i = day - series_start;
                if i >= 0 && (i as usize) < series.len() {
                    series.values[i as usize]
                } else {
                    0.0
                }
            })
            .collect())
    }

    fn series(&self, uri: &str) -> Result<&DailySeries> {
        self.entries
            .get(uri)
            .ok_or_else(|| Error::UnknownTopic(uri.to_string()))
    }

    fn out_of_range(&self, date: NaiveDate) -> Error {
        Error::OutOfRange {
            date,
            first: self.first,
            last: self.last,
        }
    }
}

/// The `w` values of `uri` for the days ending at `end`; pre-history is zero.
pub fn get_window(store: &SeriesStore, uri: &str, end: NaiveDate, w: usize) -> Result<Vec<f64>> {
    if w == 0 {
        return Err(Error::Config("window length must be at least 1".into()));
    }
    store.window(uri, store.day_index(end), w)
}
