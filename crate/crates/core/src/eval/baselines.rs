use log::warn;

use crate::forecast::{mean_sd, median, Combine};
use crate::{Error, Result};

fn last_before(series: &[f64], t0: usize) -> Result<f64> {
    if t0 == 0 || t0 > series.len() {
        return Err(Error::EmptyInput(format!("history before day {t0}")));
    }
    Ok(series[t0 - 1])
}

/// Repeats the value of day `t0 - 1`.
pub fn baseline_naive(series: &[f64], t0: usize, h: usize) -> Result<Vec<f64>> {
    Ok(vec![last_before(series, t0)?; h])
}

/// Least-squares line through the last `fit_window` days before `t0`,
/// extrapolated and clamped at zero. Fewer than two days of history falls
/// back to the naive forecast.
pub fn baseline_linear_trend(series: &[f64], t0: usize, h: usize, fit_window: usize) -> Result<Vec<f64>> {
    let last = last_before(series, t0)?;
    let n = fit_window.min(t0);
    if n < 2 {
        warn!("linear trend needs two days of history; using naive");
        return Ok(vec![last; h]);
    }
    let y = &series[t0 - n..t0];
    let xbar = (n - 1) as f64 / 2.0;
    let ybar = y.iter().sum::<f64>() / n as f64;
    let (sxy, sxx) = y.iter().enumerate().fold((0.0, 0.0), |(sxy, sxx), (i, v)| {
        let dx = i as f64 - xbar;
        (sxy + dx * (v - ybar), sxx + dx * dx)
    });
    let slope = sxy / sxx;
    Ok((0..h)
        .map(|tau| (ybar + slope * ((n + tau) as f64 - xbar)).max(0.0))
        .collect())
}

/// Raw values of one trend sequence around its start: `window` days before
/// the start followed by `horizon` days from the start.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendCurve {
    pub id: String,
    pub values: Vec<f64>,
}

/// Curves of all evaluated sequences, aligned at sequence start.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendLibrary {
    pub window: usize,
    pub horizon: usize,
    pub curves: Vec<TrendCurve>,
}

impl TrendLibrary {
    pub fn new(window: usize, horizon: usize) -> Self {
        TrendLibrary {
            window,
            horizon,
            curves: Vec::new(),
        }
    }

    pub fn push(&mut self, id: impl Into<String>, values: Vec<f64>) -> Result<()> {
        if values.len() != self.window + self.horizon {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: self.window + self.horizon,
            });
        }
        self.curves.push(TrendCurve { id: id.into(), values });
        Ok(())
    }
}

/// Average or median trend for a target that is `offset` days into its own
/// sequence, forecasting `len` days.
///
/// Every library curve except `exclude` is normalized at the same offset by
/// the mean and sample deviation of its own `window` days before that offset;
/// the pointwise combination is mapped back with the target history's mean
/// and deviation. Curves with a constant window are skipped; a constant
/// target history falls back to the naive forecast.
pub fn baseline_pooled_trend(
    kind: Combine,
    library: &TrendLibrary,
    exclude: Option<&str>,
    history: &[f64],
    offset: usize,
    len: usize,
) -> Result<Vec<f64>> {
    let w = library.window;
    if history.len() != w {
        return Err(Error::LengthMismatch {
            left: history.len(),
            right: w,
        });
    }
    if offset + len > library.horizon {
        return Err(Error::Config(format!(
            "offset {offset} + {len} days exceeds the library horizon {}",
            library.horizon
        )));
    }
    let rows: Vec<Vec<f64>> = library
        .curves
        .iter()
        .filter(|c| Some(c.id.as_str()) != exclude)
        .filter_map(|c| {
            let win = &c.values[offset..offset + w];
            if win.iter().all(|&v| v == win[0]) {
                return None;
            }
            let (mu, sd) = mean_sd(win);
            Some(
                c.values[offset + w..offset + w + len]
                    .iter()
                    .map(|v| (v - mu) / sd)
                    .collect(),
            )
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::EmptyInput("trend library".into()));
    }
    let last = *history.last().unwrap();
    if history.iter().all(|&v| v == history[0]) {
        warn!("constant target history; pooled trend falls back to naive");
        return Ok(vec![last; len]);
    }
    let (mu, sd) = mean_sd(history);
    let pooled = raw_combine(&rows, kind);
    Ok(pooled.iter().map(|z| (mu + sd * z).max(0.0)).collect())
}

/// Pointwise combination without the zero clamp (normalized values are signed).
fn raw_combine(rows: &[Vec<f64>], kind: Combine) -> Vec<f64> {
    let len = rows[0].len();
    (0..len)
        .map(|tau| {
            let mut col: Vec<f64> = rows.iter().map(|r| r[tau]).collect();
            match kind {
                Combine::Median => median(&mut col),
                Combine::Average => col.iter().sum::<f64>() / col.len() as f64,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn naive_examples() {
        assert_eq!(baseline_naive(&[5.0, 100.0], 2, 3).unwrap(), vec![100.0; 3]);
        assert_eq!(baseline_naive(&[5.0, 0.0], 2, 2).unwrap(), vec![0.0; 2]);
        assert_eq!(baseline_naive(&[5.0, 7.0, 9.0], 2, 1).unwrap(), vec![7.0]);
        assert!(baseline_naive(&[5.0], 0, 1).is_err());
    }

    #[test]
    fn linear_examples() {
        let line: Vec<f64> = (1..=14).map(f64::from).collect();
        assert_eq!(baseline_linear_trend(&line, 14, 3, 14).unwrap(), vec![15.0, 16.0, 17.0]);
        assert_eq!(baseline_linear_trend(&[7.0; 20], 20, 4, 14).unwrap(), vec![7.0; 4]);
        let down: Vec<f64> = (0..14).map(|i| 130.0 - 10.0 * i as f64).collect();
        assert_eq!(
            baseline_linear_trend(&down, 14, 4, 14).unwrap(),
            vec![0.0, 0.0, 0.0, 0.0]
        );
        let down: Vec<f64> = (0..14).map(|i| 150.0 - 10.0 * i as f64).collect();
        assert_eq!(baseline_linear_trend(&down, 14, 3, 14).unwrap(), vec![10.0, 0.0, 0.0]);
        assert_eq!(baseline_linear_trend(&[3.0, 4.0], 1, 2, 14).unwrap(), vec![3.0, 3.0]);
    }

    /// Slope and intercept from the normal equations over x = 0..n.
    fn closed_form(y: &[f64]) -> (f64, f64) {
        let n = y.len() as f64;
        let sx: f64 = (0..y.len()).map(|i| i as f64).sum();
        let sxx: f64 = (0..y.len()).map(|i| (i * i) as f64).sum();
        let sy: f64 = y.iter().sum();
        let sxy: f64 = y.iter().enumerate().map(|(i, v)| i as f64 * v).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        (slope, (sy - slope * sx) / n)
    }

    proptest! {
        #[test]
        fn linear_matches_normal_equations(y in proptest::collection::vec(100.0f64..1000.0, 14)) {
            let (b, a) = closed_form(&y);
            let got = baseline_linear_trend(&y, 14, 5, 14).unwrap();
            for (tau, g) in got.iter().enumerate() {
                let expect = (a + b * (14 + tau) as f64).max(0.0);
                prop_assert!((g - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
            }
        }
    }

    fn library(curves: &[&[f64]]) -> TrendLibrary {
        let mut lib = TrendLibrary::new(3, 2);
        for (i, c) in curves.iter().enumerate() {
            lib.push(format!("c{i}"), c.to_vec()).unwrap();
        }
        lib
    }

    #[test]
    fn pooled_identical_curves_copy_the_shape() {
        // window [1,2,3] → mu 2, sd 1; future [5,4] → z [3,2]
        let lib = library(&[&[1.0, 2.0, 3.0, 5.0, 4.0], &[1.0, 2.0, 3.0, 5.0, 4.0]]);
        // target mu 20, sd 10
        let got = baseline_pooled_trend(Combine::Average, &lib, None, &[10.0, 20.0, 30.0], 0, 2).unwrap();
        assert_eq!(got, vec![50.0, 40.0]);
    }

    #[test]
    fn pooled_median_of_two_is_the_midpoint() {
        // z futures [3,2] and [1,0] → midpoint [2,1]
        let lib = library(&[&[1.0, 2.0, 3.0, 5.0, 4.0], &[1.0, 2.0, 3.0, 3.0, 2.0]]);
        let got = baseline_pooled_trend(Combine::Median, &lib, None, &[10.0, 20.0, 30.0], 0, 2).unwrap();
        assert_eq!(got, vec![40.0, 30.0]);
        // shifting the offset renormalizes on [2,3,5] / [2,3,3]
        let got = baseline_pooled_trend(Combine::Median, &lib, Some("c1"), &[10.0, 20.0, 30.0], 1, 1).unwrap();
        let (mu, sd) = mean_sd(&[2.0, 3.0, 5.0]);
        assert!((got[0] - (20.0 + 10.0 * (4.0 - mu) / sd)).abs() < 1e-12);
    }

    #[test]
    fn pooled_degenerate_cases() {
        let lib = library(&[&[1.0, 2.0, 3.0, 5.0, 4.0]]);
        assert_eq!(
            baseline_pooled_trend(Combine::Median, &lib, None, &[7.0, 7.0, 7.0], 0, 2).unwrap(),
            vec![7.0, 7.0]
        );
        assert!(baseline_pooled_trend(Combine::Median, &lib, Some("c0"), &[1.0, 2.0, 3.0], 0, 2).is_err());
        assert!(baseline_pooled_trend(Combine::Median, &lib, None, &[1.0, 2.0, 3.0], 1, 2).is_err());
    }
}
