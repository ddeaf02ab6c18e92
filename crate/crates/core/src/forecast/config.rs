use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Distance between a history window and a candidate window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    /// Sum of squared differences.
    Euclidean,
    /// Squared euclidean distance after z-normalizing each window.
    MuSigma,
    /// Squared euclidean distance minimized over a scale of the candidate.
    YInvariant,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Euclidean => "euclidean",
            Metric::MuSigma => "musigma",
            Metric::YInvariant => "y_invariant",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "euclidean" => Ok(Metric::Euclidean),
            "musigma" | "mu_sigma" => Ok(Metric::MuSigma),
            "y_invariant" | "yinvariant" => Ok(Metric::YInvariant),
            other => Err(Error::Config(format!(
                "unknown metric `{other}` (euclidean|musigma|y_invariant)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Combine {
    Median,
    Average,
}

impl fmt::Display for Combine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Combine::Median => "median",
            Combine::Average => "average",
        })
    }
}

impl FromStr for Combine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "median" => Ok(Combine::Median),
            "average" | "mean" => Ok(Combine::Average),
            other => Err(Error::Config(format!("unknown combine `{other}` (median|average)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastConfig {
    pub metric: Metric,
    /// Number of neighbours.
    pub k: usize,
    /// History window length in days.
    pub window: usize,
    /// Days to forecast.
    pub horizon: usize,
    pub combine: Combine,
    /// Rescale each neighbour so its last window value meets the history's.
    pub scaled: bool,
    pub alpha_clamp: (f64, f64),
    /// Minimum day distance between two matches of the same topic;
    /// `None` uses the horizon.
    pub min_shift_separation: Option<usize>,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        ForecastConfig {
            metric: Metric::Euclidean,
            k: 3,
            window: 60,
            horizon: 14,
            combine: Combine::Median,
            scaled: true,
            alpha_clamp: (0.33, 3.0),
            min_shift_separation: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean `{value}` for `{key}`"))),
    }
}

impl ForecastConfig {
    pub fn separation(&self) -> usize {
        self.min_shift_separation.unwrap_or(self.horizon).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.window == 0 || (self.metric == Metric::MuSigma && self.window < 2) {
            return bad(format!("window {} is too short for {}", self.window, self.metric));
        }
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        let (lo, hi) = self.alpha_clamp;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return bad(format!("alpha clamp [{lo}, {hi}] must satisfy 0 < lo <= hi < inf"));
        }
        Ok(())
    }

    /// Applies one `key = value` setting. Returns `Ok(false)` for keys this
    /// config does not know, so callers can layer their own settings.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "metric" => self.metric = value.parse()?,
            "k" => self.k = parse(key, value)?,
            "window" | "w" => self.window = parse(key, value)?,
            "horizon" | "h" => self.horizon = parse(key, value)?,
            "combine" => self.combine = value.parse()?,
            "scaled" => self.scaled = parse_bool(key, value)?,
            "alpha_min" => self.alpha_clamp.0 = parse(key, value)?,
            "alpha_max" => self.alpha_clamp.1 = parse(key, value)?,
            "alpha_clamp" => {
                let (lo, hi) = value
                    .trim_matches(|c| c == '[' || c == ']')
                    .split_once(',')
                    .ok_or_else(|| Error::Config(format!("alpha_clamp `{value}` is not `lo,hi`")))?;
                self.alpha_clamp = (parse(key, lo.trim())?, parse(key, hi.trim())?);
            }
            "min_shift_separation" => self.min_shift_separation = Some(parse(key, value)?),
            _ => return Ok(false),
        }
        Ok(true)
    }
}

/// Splits `key = value` lines, skipping blanks and `#` comments.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = ForecastConfig::default();
        assert_eq!((c.k, c.window, c.horizon), (3, 60, 14));
        assert_eq!(c.alpha_clamp, (0.33, 3.0));
        assert_eq!(c.separation(), 14);
        c.validate().unwrap();
    }

    #[test]
    fn applies_key_values() {
        let text = "# demo\nmetric = musigma\nk=5\nwindow = 30 # comment\nscaled = false\nalpha_clamp = [0.5, 2]\nother = 1\n";
        let mut c = ForecastConfig::default();
        let mut unknown = Vec::new();
        for (k, v) in parse_key_values(text).unwrap() {
            if !c.apply(&k, &v).unwrap() {
                unknown.push(k);
            }
        }
        assert_eq!(c.metric, Metric::MuSigma);
        assert_eq!((c.k, c.window, c.scaled), (5, 30, false));
        assert_eq!(c.alpha_clamp, (0.5, 2.0));
        assert_eq!(unknown, vec!["other"]);
    }

    #[test]
    fn validation() {
        let mut c = ForecastConfig {
            k: 0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        c.k = 1;
        c.alpha_clamp = (0.0, 3.0);
        assert!(c.validate().is_err());
        assert!(ForecastConfig::default().apply("k", "x").is_err());
    }

    #[test]
    fn names_round_trip() {
        for m in [Metric::Euclidean, Metric::MuSigma, Metric::YInvariant] {
            assert_eq!(m.to_string().parse::<Metric>().unwrap(), m);
        }
        for c in [Combine::Median, Combine::Average] {
            assert_eq!(c.to_string().parse::<Combine>().unwrap(), c);
        }
    }
}
