//! Report files: one row per method and offset, a per-category breakdown and
//! plot data `tau,method,mape`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ErrorCurve, EvalReport};
use crate::trends::io::writer;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub tau: usize,
    pub rmse: f64,
    pub mape: Option<f64>,
    pub count: usize,
    pub dropped: usize,
    pub mape_count: usize,
    pub fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryRow {
    pub category: String,
    pub method: String,
    pub tau: usize,
    pub rmse: f64,
    pub mape: Option<f64>,
    pub count: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub tau: usize,
    pub method: String,
    pub mape: Option<f64>,
}

fn curve_rows<'a>(method: &str, c: &'a ErrorCurve) -> impl Iterator<Item = ReportRow> + 'a {
    let method = method.to_string();
    (0..c.tau.len()).map(move |i| ReportRow {
        method: method.clone(),
        tau: c.tau[i],
        rmse: c.rmse[i],
        mape: c.mape[i],
        count: c.count[i],
        dropped: c.dropped[i],
        mape_count: c.mape_count[i],
        fallbacks: c.fallbacks[i],
    })
}

pub fn report_rows(report: &EvalReport) -> Vec<ReportRow> {
    let mut rows: Vec<ReportRow> = report
        .methods
        .iter()
        .zip(&report.curves)
        .flat_map(|(m, c)| curve_rows(&m.to_string(), c).collect::<Vec<_>>())
        .collect();
    if let Some(c) = &report.oracle {
        rows.extend(curve_rows("oracle", c));
    }
    rows
}

pub fn category_rows(report: &EvalReport) -> Vec<CategoryRow> {
    let mut rows = Vec::new();
    for (category, curves) in &report.per_category {
        for (m, c) in report.methods.iter().zip(curves) {
            for r in curve_rows(&m.to_string(), c) {
                rows.push(CategoryRow {
                    category: category.clone(),
                    method: r.method,
                    tau: r.tau,
                    rmse: r.rmse,
                    mape: r.mape,
                    count: r.count,
                    dropped: r.dropped,
                });
            }
        }
    }
    rows
}

pub fn plot_rows(rows: &[ReportRow]) -> Vec<PlotRow> {
    let mut out: Vec<PlotRow> = rows
        .iter()
        .map(|r| PlotRow {
            tau: r.tau,
            method: r.method.clone(),
            mape: r.mape,
        })
        .collect();
    out.sort_by_key(|r| r.tau);
    out
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

pub fn write_report(path: &Path, report: &EvalReport) -> Result<()> {
    write_rows(path, &report_rows(report))
}

pub fn write_category_report(path: &Path, report: &EvalReport) -> Result<()> {
    write_rows(path, &category_rows(report))
}

pub fn read_report(path: &Path) -> Result<Vec<ReportRow>> {
    read_rows(path)
}

pub fn read_category_report(path: &Path) -> Result<Vec<CategoryRow>> {
    read_rows(path)
}

pub fn write_plot(path: &Path, rows: &[PlotRow]) -> Result<()> {
    write_rows(path, rows)
}

pub fn read_plot(path: &Path) -> Result<Vec<PlotRow>> {
    read_rows(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_round_trip() {
        let rows = vec![
            ReportRow {
                method: "nn/median_scaled/sim".into(),
                tau: 0,
                rmse: 1.0 / 3.0,
                mape: Some(12.5),
                count: 4,
                dropped: 0,
                mape_count: 4,
                fallbacks: 0,
            },
            ReportRow {
                method: "naive".into(),
                tau: 1,
                rmse: 2.0,
                mape: None,
                count: 4,
                dropped: 0,
                mape_count: 0,
                fallbacks: 1,
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_rows(&p, &rows).unwrap();
        assert_eq!(read_report(&p).unwrap(), rows);
        let plot = plot_rows(&rows);
        write_plot(&p, &plot).unwrap();
        assert_eq!(read_plot(&p).unwrap(), plot);
    }
}
