//! Offline topic-to-article resolution against the titles of a store.

use std::collections::{BTreeMap, HashMap};

use super::text::{levenshtein_chars, normalize_topic};
use crate::store::SeriesStore;
use crate::{Error, Result};

/// Fraction of the longer string's length below which a fuzzy match counts.
pub const FUZZY_FACTOR: f64 = 0.35;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    Exact(String),
    Fuzzy { uri: String, distance: usize },
    Unresolved,
}

impl Resolution {
    pub fn uri(&self) -> Option<&str> {
        match self {
            Resolution::Exact(uri) | Resolution::Fuzzy { uri, .. } => Some(uri),
            Resolution::Unresolved => None,
        }
    }
}

/// Normalized title lookup with a first-token block for fuzzy search.
#[derive(Debug, Clone, Default)]
pub struct TitleIndex {
    exact: HashMap<String, String>,
    by_first_token: BTreeMap<String, Vec<(String, String)>>,
}

impl TitleIndex {
    pub fn from_uris<'a>(uris: impl IntoIterator<Item = &'a str>) -> Self {
        let mut index = TitleIndex::default();
        for uri in uris {
            let norm = normalize_topic(uri);
            if norm.is_empty() {
                continue;
            }
            match index.exact.get(&norm) {
                Some(existing) if existing.as_str() <= uri => {}
                _ => {
                    index.exact.insert(norm.clone(), uri.to_string());
                }
            }
            let first = norm.split(' ').next().unwrap_or_default().to_string();
            index
                .by_first_token
                .entry(first)
                .or_default()
                .push((norm, uri.to_string()));
        }
        index
    }

    pub fn from_store(store: &SeriesStore) -> Self {
        Self::from_uris(store.uris())
    }

    pub fn len(&self) -> usize {
        self.exact.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exact.is_empty()
    }

    /// Titles whose first token is a prefix of `token` or extends it.
    fn block<'a>(&'a self, token: &'a str) -> impl Iterator<Item = &'a (String, String)> + 'a {
        let extending = self
            .by_first_token
            .range(token.to_string()..)
            .take_while(move |(k, _)| k.starts_with(token))
            .flat_map(|(_, v)| v.iter());
        let prefixes = token
            .char_indices()
            .skip(1)
            .filter_map(move |(i, _)| self.by_first_token.get(&token[..i]))
            .flat_map(|v| v.iter());
        extending.chain(prefixes)
    }
}

/// Resolves a feed topic to an article uri.
///
/// An exact normalized match wins. Otherwise the closest title (by edit
/// distance, then uri) among titles whose first token is prefix-compatible
/// with the topic's first token is taken, provided its distance is below
/// `0.35 × max(len)`.
pub fn resolve_topic_uri(topic: &str, index: &TitleIndex) -> Result<Resolution> {
    let norm = normalize_topic(topic);
    if norm.is_empty() {
        return Err(Error::EmptyInput("topic is empty".into()));
    }
    if let Some(uri) = index.exact.get(&norm) {
        return Ok(Resolution::Exact(uri.clone()));
    }
    let first = norm.split(' ').next().unwrap_or_default();
    let topic_chars: Vec<char> = norm.chars().collect();
    let mut best: Option<(usize, &str)> = None;
    for (title, uri) in index.block(first) {
        let title_chars: Vec<char> = title.chars().collect();
        let longest = topic_chars.len().max(title_chars.len());
        let limit = FUZZY_FACTOR * longest as f64;
        if topic_chars.len().abs_diff(title_chars.len()) as f64 >= limit {
            continue;
        }
        let d = levenshtein_chars(&topic_chars, &title_chars);
        if (d as f64) < limit && best.is_none_or(|(bd, bu)| (d, uri.as_str()) < (bd, bu)) {
            best = Some((d, uri));
        }
    }
    Ok(match best {
        Some((distance, uri)) => Resolution::Fuzzy {
            uri: uri.to_string(),
            distance,
        },
        None => Resolution::Unresolved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> TitleIndex {
        TitleIndex::from_uris(["Super_Bowl", "Super_Bowl_2012", "Weather"])
    }

    #[test]
    fn exact_normalized_match() {
        assert_eq!(
            resolve_topic_uri("Super Bowl", &toy()).unwrap(),
            Resolution::Exact("Super_Bowl".into())
        );
    }

    #[test]
    fn fuzzy_match_within_threshold() {
        // "superbowl 2012" vs "super bowl 2012": one insertion, 1 < 0.35 * 15
        assert_eq!(
            resolve_topic_uri("superbowl 2012", &toy()).unwrap(),
            Resolution::Fuzzy {
                uri: "Super_Bowl_2012".into(),
                distance: 1
            }
        );
    }

    #[test]
    fn unresolved_when_nothing_close() {
        assert_eq!(resolve_topic_uri("zzqx", &toy()).unwrap(), Resolution::Unresolved);
        assert_eq!(resolve_topic_uri("weathr report now", &toy()).unwrap(), Resolution::Unresolved);
    }

    #[test]
    fn empty_topic_is_an_error() {
        assert!(resolve_topic_uri("  _ ", &toy()).is_err());
    }

    #[test]
    fn exact_collisions_pick_smallest_uri() {
        let index = TitleIndex::from_uris(["super_bowl", "Super_Bowl"]);
        assert_eq!(
            resolve_topic_uri("SUPER BOWL", &index).unwrap().uri(),
            Some("Super_Bowl")
        );
    }
}
