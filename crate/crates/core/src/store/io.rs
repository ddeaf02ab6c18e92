//! On-disk store container and its JSON manifest.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! b"TCSTORE1"
//! u32 header length, then a JSON header {first, last, series, values}
//! per series: u32 uri length, uri bytes, u32 start offset, u32 length
//! values column: f64 for every day of every series, in series order
//! recorded column: one bit per value, LSB first
//! ```
//!
//! Values are written as raw IEEE-754 bits, so a write/read cycle is exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{DailySeries, IngestStats, SeriesStore};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"TCSTORE1";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    first: NaiveDate,
    last: NaiveDate,
    series: u64,
    values: u64,
}

/// Human-readable summary written next to a store.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreManifest {
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
    pub articles: u64,
    pub stored_days: u64,
    pub ingest: IngestStats,
}

impl StoreManifest {
    pub fn describe(store: &SeriesStore, ingest: IngestStats) -> Self {
        StoreManifest {
            first_date: store.first_date(),
            last_date: store.last_date(),
            articles: store.len() as u64,
            stored_days: store.iter().map(|s| s.len() as u64).sum(),
            ingest,
        }
    }
}

pub fn write_store(path: &Path, store: &SeriesStore) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    encode(store, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_store(path: &Path) -> Result<SeriesStore> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut input = BufReader::new(file);
    decode(&mut input).map_err(|e| match e {
        DecodeError::Io(e) => Error::io(path, e),
        DecodeError::Bad(detail) => Error::format("store file", format!("{}: {detail}", path.display())),
        DecodeError::Store(e) => e,
    })
}

pub fn write_manifest(path: &Path, manifest: &StoreManifest) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::format("manifest", e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_manifest(path: &Path) -> Result<StoreManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format("manifest", e.to_string()))
}

fn encode(store: &SeriesStore, out: &mut impl Write) -> std::io::Result<()> {
    let total: usize = store.iter().map(DailySeries::len).sum();
    let header = Header {
        first: store.first_date(),
        last: store.last_date(),
        series: store.len() as u64,
        values: total as u64,
    };
    let header = serde_json::to_vec(&header)?;
    out.write_all(MAGIC)?;
    out.write_all(&(header.len() as u32).to_le_bytes())?;
    out.write_all(&header)?;

    for s in store.iter() {
        out.write_all(&(s.uri.len() as u32).to_le_bytes())?;
        out.write_all(s.uri.as_bytes())?;
        out.write_all(&(store.day_index(s.start) as u32).to_le_bytes())?;
        out.write_all(&(s.len() as u32).to_le_bytes())?;
    }
    for s in store.iter() {
        for v in &s.values {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    let mut bits = vec![0u8; total.div_ceil(8)];
    for (i, rec) in store.iter().flat_map(|s| s.recorded.iter()).enumerate() {
        if *rec {
            bits[i / 8] |= 1 << (i % 8);
        }
    }
    out.write_all(&bits)
}

enum DecodeError {
    Io(std::io::Error),
    Bad(String),
    Store(Error),
}

impl From<std::io::Error> for DecodeError {
    fn from(e: std::io::Error) -> Self {
        DecodeError::Io(e)
    }
}

fn read_u32(input: &mut impl Read) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn decode(input: &mut impl Read) -> Result<SeriesStore, DecodeError> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(DecodeError::Bad("not a trendcast store".into()));
    }
    let len = read_u32(input)? as usize;
    let mut header = vec![0u8; len];
    input.read_exact(&mut header)?;
    let header: Header =
        serde_json::from_slice(&header).map_err(|e| DecodeError::Bad(e.to_string()))?;

    let mut directory = Vec::with_capacity(header.series as usize);
    for _ in 0..header.series {
        let n = read_u32(input)? as usize;
        let mut uri = vec![0u8; n];
        input.read_exact(&mut uri)?;
        let uri = String::from_utf8(uri).map_err(|e| DecodeError::Bad(e.to_string()))?;
        let start = read_u32(input)?;
        let len = read_u32(input)? as usize;
        directory.push((uri, start, len));
    }
    let total: usize = directory.iter().map(|d| d.2).sum();
    if total as u64 != header.values {
        return Err(DecodeError::Bad(format!(
            "directory covers {total} values, header says {}",
            header.values
        )));
    }
    let mut raw = vec![0u8; total * 8];
    input.read_exact(&mut raw)?;
    let mut bits = vec![0u8; total.div_ceil(8)];
    input.read_exact(&mut bits)?;

    let mut store = SeriesStore::new(header.first, header.last).map_err(DecodeError::Store)?;
    let mut pos = 0usize;
    for (uri, start, len) in directory {
        let values = raw[pos * 8..(pos + len) * 8]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        let recorded = (pos..pos + len)
            .map(|i| bits[i / 8] & (1 << (i % 8)) != 0)
            .collect();
        pos += len;
        store
            .insert(DailySeries {
                uri,
                start: header.first + Days::new(start as u64),
                values,
                recorded,
            })
            .map_err(DecodeError::Store)?;
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn store_from(series: Vec<(u8, Vec<f64>)>) -> SeriesStore {
        let first = NaiveDate::from_ymd_opt(2011, 12, 30).unwrap();
        let last = first + Days::new(80);
        let mut store = SeriesStore::new(first, last).unwrap();
        for (i, (offset, values)) in series.into_iter().enumerate() {
            let mut s = DailySeries::new(format!("T{i}_ü"), first + Days::new(offset as u64), values);
            for (j, r) in s.recorded.iter_mut().enumerate() {
                *r = j % 3 != 1;
            }
            store.insert(s).unwrap();
        }
        store
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(series in proptest::collection::vec(
            (0u8..40, proptest::collection::vec(0.0f64..1e9, 1..40)), 0..8)) {
            let store = store_from(series);
            let mut buf = Vec::new();
            encode(&store, &mut buf).unwrap();
            let back = match decode(&mut buf.as_slice()) {
                Ok(s) => s,
                Err(_) => panic!("decode failed"),
            };
            prop_assert_eq!(&back, &store);
            for (a, b) in back.iter().zip(store.iter()) {
                for (x, y) in a.values.iter().zip(&b.values) {
                    prop_assert_eq!(x.to_bits(), y.to_bits());
                }
            }
        }
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.bin");
        std::fs::write(&path, b"hello world, not a store").unwrap();
        assert!(matches!(read_store(&path), Err(Error::Format { .. })));
    }

    #[test]
    fn manifest_round_trip() {
        let store = store_from(vec![(0, vec![1.0, 2.0])]);
        let m = StoreManifest::describe(&store, IngestStats::default());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        write_manifest(&path, &m).unwrap();
        assert_eq!(read_manifest(&path).unwrap(), m);
    }
}
