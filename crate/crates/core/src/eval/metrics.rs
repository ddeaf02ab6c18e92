use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

fn check(a: &[f64], f: &[f64]) -> Result<()> {
    if a.len() != f.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: f.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("error series".into()));
    }
    Ok(())
}

/// Root mean squared error on raw view counts.
pub fn rmse(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    check(actual, forecast)?;
    let ss: f64 = actual.iter().zip(forecast).map(|(a, f)| (a - f) * (a - f)).sum();
    Ok((ss / actual.len() as f64).sqrt())
}

/// Mean absolute percentage error over days with a positive actual value;
/// `None` when there is no such day.
pub fn mape(actual: &[f64], forecast: &[f64]) -> Result<Option<f64>> {
    check(actual, forecast)?;
    let (sum, n) = actual
        .iter()
        .zip(forecast)
        .filter(|(a, _)| **a > 0.0)
        .fold((0.0, 0usize), |(s, n), (a, f)| (s + ((a - f) / a).abs(), n + 1));
    Ok((n > 0).then(|| 100.0 * sum / n as f64))
}

/// Mean after dropping the `floor(fraction * n)` largest values. The kept
/// values are summed in their original order, so a zero fraction gives the
/// plain mean exactly. Returns the mean and the number dropped.
pub fn trimmed_mean(values: &[f64], fraction: f64) -> Option<(f64, usize)> {
    if values.is_empty() {
        return None;
    }
    let drop = ((fraction * values.len() as f64).floor() as usize).min(values.len() - 1);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    let mut dropped = vec![false; values.len()];
    for &i in &order[..drop] {
        dropped[i] = true;
    }
    let kept: Vec<f64> = values
        .iter()
        .zip(&dropped)
        .filter(|(_, d)| !**d)
        .map(|(v, _)| *v)
        .collect();
    Some((kept.iter().sum::<f64>() / kept.len() as f64, drop))
}

/// Fraction of bootstrap resamples (over paired observations) in which the
/// mean of `better` is strictly below the mean of `worse`.
pub fn bootstrap_confidence(better: &[f64], worse: &[f64], resamples: usize, seed: u64) -> Result<f64> {
    check(better, worse)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = better.len();
    let mut wins = 0usize;
    for _ in 0..resamples {
        let mut diff = 0.0;
        for _ in 0..n {
            let i = rng.random_range(0..n);
            diff += worse[i] - better[i];
        }
        if diff > 0.0 {
            wins += 1;
        }
    }
    Ok(wins as f64 / resamples.max(1) as f64)
}
