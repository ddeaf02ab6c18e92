//! Forecast files: `uri,t0,tau,value` rows plus a companion neighbour file
//! `uri,t0,rank,neighbor,shift,distance,alpha`. Days are written as dates.

use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::Forecast;
use crate::store::SeriesStore;
use crate::trends::io::writer;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRow {
    pub uri: String,
    pub t0: NaiveDate,
    pub tau: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborRow {
    pub uri: String,
    pub t0: NaiveDate,
    pub rank: usize,
    pub neighbor: String,
    pub shift: NaiveDate,
    pub distance: f64,
    pub alpha: f64,
}

pub fn forecast_rows(forecasts: &[Forecast], store: &SeriesStore) -> Vec<ForecastRow> {
    forecasts
        .iter()
        .flat_map(|f| {
            f.values.iter().enumerate().map(move |(tau, &value)| ForecastRow {
                uri: f.uri.clone(),
                t0: store.date_of(f.t0),
                tau,
                value,
            })
        })
        .collect()
}

pub fn neighbor_rows(forecasts: &[Forecast], store: &SeriesStore) -> Vec<NeighborRow> {
    forecasts
        .iter()
        .flat_map(|f| {
            f.neighbors.iter().enumerate().map(move |(rank, m)| NeighborRow {
                uri: f.uri.clone(),
                t0: store.date_of(f.t0),
                rank: rank + 1,
                neighbor: m.candidate.uri.clone(),
                shift: store.date_of(m.candidate.shift),
                distance: m.distance,
                alpha: m.alpha,
            })
        })
        .collect()
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = writer(path)?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::csv(path, e))
}

pub fn write_forecasts(path: &Path, forecasts: &[Forecast], store: &SeriesStore) -> Result<()> {
    write_rows(path, &forecast_rows(forecasts, store))
}

pub fn write_neighbors(path: &Path, forecasts: &[Forecast], store: &SeriesStore) -> Result<()> {
    write_rows(path, &neighbor_rows(forecasts, store))
}

pub fn read_forecasts(path: &Path) -> Result<Vec<ForecastRow>> {
    read_rows(path)
}

pub fn read_neighbors(path: &Path) -> Result<Vec<NeighborRow>> {
    read_rows(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::{forecast, ForecastConfig};

    #[test]
    fn round_trip_is_exact() {
        let first = NaiveDate::from_ymd_opt(2012, 1, 1).unwrap();
        let v: Vec<f64> = (0..80).map(|i| 1.0 + (i as f64 * 0.37).sin().abs() * 1e3 / 7.0).collect();
        let store = SeriesStore::from_values(first, first + chrono::Days::new(79), [("a b", v)]).unwrap();
        let cfg = ForecastConfig {
            window: 10,
            horizon: 5,
            ..Default::default()
        };
        let f = forecast("a b", 70, &["a b"], &store, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (fp, np) = (dir.path().join("f.csv"), dir.path().join("n.csv"));
        write_forecasts(&fp, std::slice::from_ref(&f), &store).unwrap();
        write_neighbors(&np, std::slice::from_ref(&f), &store).unwrap();
        assert_eq!(read_forecasts(&fp).unwrap(), forecast_rows(std::slice::from_ref(&f), &store));
        assert_eq!(read_neighbors(&np).unwrap(), neighbor_rows(&[f], &store));
    }
}
