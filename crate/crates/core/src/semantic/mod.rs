//! Category/type overlap between articles and the topic pools drawn from it.

mod ntriples;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::{Error, Result};

pub use ntriples::{load_ntriples, resource_key, LoadStats, PredicateConfig, DCTERMS_SUBJECT, RDF_TYPE};

/// Default cap on the number of similar topics.
pub const SIMILAR_LIMIT: usize = 200;

/// Forward and inverted category/type maps.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SemanticIndex {
    categories_of: BTreeMap<String, BTreeSet<String>>,
    types_of: BTreeMap<String, BTreeSet<String>>,
    by_category: BTreeMap<String, BTreeSet<String>>,
    by_type: BTreeMap<String, BTreeSet<String>>,
}

fn empty() -> &'static BTreeSet<String> {
    static EMPTY: BTreeSet<String> = BTreeSet::new();
    &EMPTY
}

impl SemanticIndex {
    pub fn insert_category(&mut self, uri: &str, category: &str) {
        self.categories_of
            .entry(uri.to_string())
            .or_default()
            .insert(category.to_string());
        self.by_category
            .entry(category.to_string())
            .or_default()
            .insert(uri.to_string());
    }

    pub fn insert_type(&mut self, uri: &str, ty: &str) {
        self.types_of
            .entry(uri.to_string())
            .or_default()
            .insert(ty.to_string());
        self.by_type
            .entry(ty.to_string())
            .or_default()
            .insert(uri.to_string());
    }

    pub fn categories(&self, uri: &str) -> &BTreeSet<String> {
        self.categories_of.get(uri).unwrap_or(empty())
    }

    pub fn types(&self, uri: &str) -> &BTreeSet<String> {
        self.types_of.get(uri).unwrap_or(empty())
    }

    /// Uris carrying `category`.
    pub fn with_category(&self, category: &str) -> &BTreeSet<String> {
        self.by_category.get(category).unwrap_or(empty())
    }

    pub fn with_type(&self, ty: &str) -> &BTreeSet<String> {
        self.by_type.get(ty).unwrap_or(empty())
    }

    pub fn contains(&self, uri: &str) -> bool {
        self.categories_of.contains_key(uri) || self.types_of.contains_key(uri)
    }

    /// Every uri with at least one category or type.
    pub fn uris(&self) -> BTreeSet<&str> {
        self.categories_of
            .keys()
            .chain(self.types_of.keys())
            .map(String::as_str)
            .collect()
    }

    /// Shared categories plus shared types.
    pub fn overlap(&self, a: &str, b: &str) -> usize {
        self.categories(a).intersection(self.categories(b)).count()
            + self.types(a).intersection(self.types(b)).count()
    }

    /// Forward (subject, object) pairs: categories then types, sorted.
    pub fn pairs(&self) -> (Vec<Pair<'_>>, Vec<Pair<'_>>) {
        (flatten(&self.categories_of), flatten(&self.types_of))
    }
}

/// A (subject, object) assertion.
pub type Pair<'a> = (&'a str, &'a str);

fn flatten(map: &BTreeMap<String, BTreeSet<String>>) -> Vec<Pair<'_>> {
    map.iter()
        .flat_map(|(s, os)| os.iter().map(move |o| (s.as_str(), o.as_str())))
        .collect()
}

/// Topics sharing the most categories or types with `uri`.
///
/// Sorted by descending overlap, then uri; zero-overlap topics and `uri`
/// itself are left out; at most `limit` entries. A uri missing from the index
/// yields an empty list.
pub fn similar_topics(uri: &str, index: &SemanticIndex, limit: usize) -> Vec<(String, usize)> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for c in index.categories(uri) {
        for other in index.with_category(c) {
            *counts.entry(other.as_str()).or_default() += 1;
        }
    }
    for t in index.types(uri) {
        for other in index.with_type(t) {
            *counts.entry(other.as_str()).or_default() += 1;
        }
    }
    counts.remove(uri);
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().filter(|&(_, n)| n > 0).collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(limit);
    ranked.into_iter().map(|(u, n)| (u.to_string(), n)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TopicSetKind {
    /// The trending topic alone.
    Itself,
    /// A general pool, e.g. the top trending topics.
    General,
    /// The topic plus its semantic neighbours.
    Similar,
}

impl fmt::Display for TopicSetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TopicSetKind::Itself => "self",
            TopicSetKind::General => "gen",
            TopicSetKind::Similar => "sim",
        })
    }
}

impl FromStr for TopicSetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "self" => Ok(TopicSetKind::Itself),
            "gen" | "general" => Ok(TopicSetKind::General),
            "sim" | "similar" => Ok(TopicSetKind::Similar),
            other => Err(Error::Config(format!("unknown topic set `{other}` (self|gen|sim)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicSet {
    pub kind: TopicSetKind,
    /// Distinct uris; for `Similar` the trending topic comes first.
    pub members: Vec<String>,
}

/// Builds the candidate pool for forecasting `topic`.
///
/// `Similar` holds the topic itself followed by up to `limit` neighbours. If
/// the topic is not in the index the pool degrades to `Itself` with a warning.
pub fn build_topic_set(
    kind: TopicSetKind,
    topic: &str,
    index: &SemanticIndex,
    general: &[String],
    limit: usize,
) -> TopicSet {
    match kind {
        TopicSetKind::Itself => TopicSet {
            kind,
            members: vec![topic.to_string()],
        },
        TopicSetKind::General => {
            let mut seen = BTreeSet::new();
            TopicSet {
                kind,
                members: general
                    .iter()
                    .filter(|u| seen.insert(u.as_str()))
                    .cloned()
                    .collect(),
            }
        }
        TopicSetKind::Similar if !index.contains(topic) => {
            log::warn!("`{topic}` has no categories or types; falling back to the topic alone");
            TopicSet {
                kind: TopicSetKind::Itself,
                members: vec![topic.to_string()],
            }
        }
        TopicSetKind::Similar => {
            let mut members = vec![topic.to_string()];
            members.extend(similar_topics(topic, index, limit).into_iter().map(|(u, _)| u));
            TopicSet { kind, members }
        }
    }
}

/// One member of a written topic set.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TopicSetRow {
    pub topic: String,
    pub kind: String,
    /// 0 for the first member.
    pub rank: usize,
    pub uri: String,
    /// Shared categories and types with `topic`.
    pub overlap: usize,
}

/// Writes `topic,kind,rank,uri,overlap` rows for each `(topic, set)`.
pub fn write_topic_sets(path: &Path, sets: &[(String, TopicSet)], index: &SemanticIndex) -> Result<()> {
    let mut w = crate::trends::io::writer(path)?;
    for (topic, set) in sets {
        for (rank, uri) in set.members.iter().enumerate() {
            let row = TopicSetRow {
                topic: topic.clone(),
                kind: set.kind.to_string(),
                rank,
                uri: uri.clone(),
                overlap: index.overlap(topic, uri),
            };
            w.serialize(row).map_err(|e| Error::csv(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a file written by [`write_topic_sets`] back into sets, in file order.
pub fn read_topic_sets(path: &Path) -> Result<Vec<(String, TopicSet)>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut out: Vec<(String, TopicSet)> = Vec::new();
    for row in reader.deserialize::<TopicSetRow>() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let kind: TopicSetKind = row.kind.parse()?;
        match out.last_mut() {
            Some((topic, set)) if *topic == row.topic && set.kind == kind => set.members.push(row.uri),
            _ => out.push((
                row.topic,
                TopicSet {
                    kind,
                    members: vec![row.uri],
                },
            )),
        }
    }
    Ok(out)
}
