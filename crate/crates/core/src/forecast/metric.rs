//! Window distances. Each public function goes through [`PreparedQuery`], the
//! same code path the candidate scan uses, so both agree bit for bit.

use super::Metric;
use crate::{Error, Result};

fn check(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(())
}

/// Sum of squared differences.
pub fn distance_euclidean(x: &[f64], y: &[f64]) -> Result<f64> {
    check(x, y)?;
    Ok(PreparedQuery::new(Metric::Euclidean, x).distance(y, f64::INFINITY))
}

/// Squared euclidean distance of the z-normalized windows (sample standard
/// deviation). Infinite when either window is constant.
pub fn distance_musigma(x: &[f64], y: &[f64]) -> Result<f64> {
    check(x, y)?;
    if x.len() < 2 {
        return Err(Error::Config("musigma needs windows of at least 2 days".into()));
    }
    Ok(PreparedQuery::new(Metric::MuSigma, x).distance(y, f64::INFINITY))
}

/// `min over γ of Σ (x_i − γ y_i)²`, with the least-squares γ.
pub fn distance_y_invariant(x: &[f64], y: &[f64]) -> Result<f64> {
    check(x, y)?;
    Ok(PreparedQuery::new(Metric::YInvariant, x).distance(y, f64::INFINITY))
}

/// The least-squares scale `Σxy / Σy²` (zero when `y` is all zeros).
pub fn y_invariant_gamma(x: &[f64], y: &[f64]) -> f64 {
    let (sxy, syy) = x
        .iter()
        .zip(y)
        .fold((0.0, 0.0), |(a, b), (xi, yi)| (a + xi * yi, b + yi * yi));
    if syy > 0.0 {
        sxy / syy
    } else {
        0.0
    }
}

/// z-normalizes `x`; `None` when it is constant.
pub fn z_normalize(x: &[f64]) -> Option<Vec<f64>> {
    let first = *x.first()?;
    if x.len() < 2 || x.iter().all(|&v| v == first) {
        return None;
    }
    let (mu, sd) = mean_sd(x);
    Some(x.iter().map(|v| (v - mu) / sd).collect())
}

/// Mean and sample standard deviation.
pub fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mu = x.iter().sum::<f64>() / n;
    let ss: f64 = x.iter().map(|v| (v - mu) * (v - mu)).sum();
    (mu, (ss / (n - 1.0).max(1.0)).sqrt())
}

/// A history window preprocessed for repeated distance queries.
#[derive(Debug, Clone)]
pub(crate) enum PreparedQuery {
    Euclidean(Vec<f64>),
    /// `None` when the history itself is constant.
    MuSigma(Option<Vec<f64>>),
    YInvariant(Vec<f64>),
}

impl PreparedQuery {
    pub(crate) fn new(metric: Metric, x: &[f64]) -> Self {
        match metric {
            Metric::Euclidean => PreparedQuery::Euclidean(x.to_vec()),
            Metric::MuSigma => PreparedQuery::MuSigma(z_normalize(x)),
            Metric::YInvariant => PreparedQuery::YInvariant(x.to_vec()),
        }
    }

    /// Distance to `y`. Once a running sum exceeds `abandon_above` the scan
    /// stops and returns infinity; terms are added in index order either way,
    /// so non-abandoned results do not depend on the threshold.
    pub(crate) fn distance(&self, y: &[f64], abandon_above: f64) -> f64 {
        match self {
            PreparedQuery::Euclidean(x) => squared_abandoning(x, y, abandon_above),
            PreparedQuery::MuSigma(None) => f64::INFINITY,
            PreparedQuery::MuSigma(Some(xn)) => match z_normalize(y) {
                Some(yn) => squared_abandoning(xn, &yn, abandon_above),
                None => f64::INFINITY,
            },
            PreparedQuery::YInvariant(x) => {
                let syy: f64 = y.iter().map(|v| v * v).sum();
                if syy > 0.0 {
                    let gamma = y_invariant_gamma(x, y);
                    x.iter().zip(y).map(|(a, b)| (a - gamma * b).powi(2)).sum()
                } else {
                    x.iter().map(|a| a * a).sum()
                }
            }
        }
    }
}

fn squared_abandoning(x: &[f64], y: &[f64], abandon_above: f64) -> f64 {
    let mut sum = 0.0;
    for (a, b) in x.iter().zip(y) {
        let d = a - b;
        sum += d * d;
        if sum > abandon_above {
            return f64::INFINITY;
        }
    }
    sum
}
