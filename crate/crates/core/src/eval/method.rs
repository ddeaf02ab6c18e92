use std::fmt;
use std::str::FromStr;

use crate::forecast::{Combine, ForecastConfig, Metric};
use crate::semantic::TopicSetKind;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Naive,
    LinearTrend,
    AverageTrend,
    MedianTrend,
    Nn,
}

/// A forecasting method under evaluation.
///
/// Names: `naive`, `linear_trend`, `average_trend`, `median_trend`, and
/// `nn/<median|average>_<scaled|unscaled>/<self|gen|sim>` optionally followed
/// by `/<metric>`, `/k<N>` and `/w<N>` when they differ from the defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodId {
    pub family: Family,
    pub nn: Option<ForecastConfig>,
    pub topic_set: Option<TopicSetKind>,
}

impl MethodId {
    pub fn baseline(family: Family) -> Self {
        assert!(family != Family::Nn, "nn methods need a config");
        MethodId {
            family,
            nn: None,
            topic_set: None,
        }
    }

    pub fn nn(config: ForecastConfig, topic_set: TopicSetKind) -> Self {
        MethodId {
            family: Family::Nn,
            nn: Some(config),
            topic_set: Some(topic_set),
        }
    }

    /// The four baselines plus `nn/median_scaled/sim`.
    pub fn standard_set() -> Vec<MethodId> {
        let mut out: Vec<MethodId> = [Family::Naive, Family::LinearTrend, Family::AverageTrend, Family::MedianTrend]
            .into_iter()
            .map(MethodId::baseline)
            .collect();
        out.push(MethodId::nn(ForecastConfig::default(), TopicSetKind::Similar));
        out
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Naive => f.write_str("naive"),
            Family::LinearTrend => f.write_str("linear_trend"),
            Family::AverageTrend => f.write_str("average_trend"),
            Family::MedianTrend => f.write_str("median_trend"),
            Family::Nn => {
                let c = self.nn.as_ref().expect("nn method without config");
                let d = ForecastConfig::default();
                let scaled = if c.scaled { "scaled" } else { "unscaled" };
                write!(f, "nn/{}_{}/{}", c.combine, scaled, self.topic_set.unwrap_or(TopicSetKind::Similar))?;
                if c.metric != d.metric {
                    write!(f, "/{}", c.metric)?;
                }
                if c.k != d.k {
                    write!(f, "/k{}", c.k)?;
                }
                if c.window != d.window {
                    write!(f, "/w{}", c.window)?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown method `{s}`"));
        let mut parts = s.trim().split('/');
        match parts.next().ok_or_else(bad)? {
            "naive" if parts.clone().next().is_none() => return Ok(MethodId::baseline(Family::Naive)),
            "linear_trend" if parts.clone().next().is_none() => {
                return Ok(MethodId::baseline(Family::LinearTrend))
            }
            "average_trend" if parts.clone().next().is_none() => {
                return Ok(MethodId::baseline(Family::AverageTrend))
            }
            "median_trend" if parts.clone().next().is_none() => {
                return Ok(MethodId::baseline(Family::MedianTrend))
            }
            "nn" => {}
            _ => return Err(bad()),
        }
        let mut config = ForecastConfig::default();
        let (combine, scaled) = parts.next().ok_or_else(bad)?.split_once('_').ok_or_else(bad)?;
        config.combine = combine.parse::<Combine>()?;
        config.scaled = match scaled {
            "scaled" => true,
            "unscaled" => false,
            _ => return Err(bad()),
        };
        let kind: TopicSetKind = parts.next().ok_or_else(bad)?.parse()?;
        for part in parts {
            if let Ok(m) = part.parse::<Metric>() {
                config.metric = m;
            } else if let Some(k) = part.strip_prefix('k').and_then(|k| k.parse().ok()) {
                config.k = k;
            } else if let Some(w) = part.strip_prefix('w').and_then(|w| w.parse().ok()) {
                config.window = w;
            } else {
                return Err(bad());
            }
        }
        config.validate()?;
        Ok(MethodId::nn(config, kind))
    }
}
