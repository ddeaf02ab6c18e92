//! Minimal N-Triples reader: IRI subjects, predicates and objects only.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use flate2::read::MultiGzDecoder;

use super::SemanticIndex;
use crate::store::canonical_title;
use crate::{par, Error, Result};

pub const DCTERMS_SUBJECT: &str = "http://purl.org/dc/terms/subject";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// Predicates whose objects count as categories and as types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateConfig {
    pub category: BTreeSet<String>,
    pub types: BTreeSet<String>,
}

impl Default for PredicateConfig {
    fn default() -> Self {
        PredicateConfig {
            category: BTreeSet::from([DCTERMS_SUBJECT.to_string()]),
            types: BTreeSet::from([RDF_TYPE.to_string()]),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub files: u64,
    pub lines: u64,
    pub accepted: u64,
    /// Well-formed lines with another predicate or a non-IRI term.
    pub skipped: u64,
    pub malformed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Term<'a> {
    Iri(&'a str),
    Other,
}

/// Splits `<s> <p> <o> .` into its three terms. Returns `None` when the line
/// is not a triple.
pub(crate) fn parse_triple(line: &str) -> Option<(Term<'_>, Term<'_>, Term<'_>)> {
    let body = line.trim().strip_suffix('.')?.trim_end();
    let (s, rest) = next_term(body)?;
    let (p, rest) = next_term(rest)?;
    let (o, rest) = next_term(rest)?;
    rest.trim().is_empty().then_some((s, p, o))
}

fn next_term(input: &str) -> Option<(Term<'_>, &str)> {
    let input = input.trim_start();
    if let Some(rest) = input.strip_prefix('<') {
        let end = rest.find('>')?;
        let iri = &rest[..end];
        if iri.is_empty() || iri.contains(char::is_whitespace) {
            return None;
        }
        return Some((Term::Iri(iri), &rest[end + 1..]));
    }
    if let Some(rest) = input.strip_prefix('"') {
        // literal: skip to the closing quote, honouring escapes, then any
        // language tag or datatype suffix
        let mut escaped = false;
        let close = rest.char_indices().find(|&(_, c)| {
            let hit = c == '"' && !escaped;
            escaped = c == '\\' && !escaped;
            hit
        })?;
        let after = &rest[close.0 + 1..];
        let end = after.find(char::is_whitespace).unwrap_or(after.len());
        return Some((Term::Other, &after[end..]));
    }
    if input.starts_with("_:") {
        let end = input.find(char::is_whitespace)?;
        return Some((Term::Other, &input[end..]));
    }
    None
}

/// Local key for an IRI: the part after `/resource/` (percent-decoded,
/// underscores for spaces) for DBpedia-style resources, the full IRI
/// otherwise.
pub fn resource_key(iri: &str) -> String {
    match iri.split_once("/resource/") {
        Some((_, local)) => canonical_title(local),
        None => iri.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Category,
    Type,
}

type Parsed = (Vec<(Kind, String, String)>, LoadStats);

fn open(path: &Path) -> Result<Box<dyn BufRead>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let inner: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(MultiGzDecoder::new(file))
    } else {
        Box::new(file)
    };
    Ok(Box::new(BufReader::new(inner)))
}

fn parse_file(path: &Path, predicates: &PredicateConfig) -> Result<Parsed> {
    let mut stats = LoadStats {
        files: 1,
        ..LoadStats::default()
    };
    let mut pairs = Vec::new();
    for line in open(path)?.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        stats.lines += 1;
        let Some((s, p, o)) = parse_triple(trimmed) else {
            stats.malformed += 1;
            continue;
        };
        let (Term::Iri(s), Term::Iri(p), Term::Iri(o)) = (s, p, o) else {
            stats.skipped += 1;
            continue;
        };
        let kind = if predicates.category.contains(p) {
            Kind::Category
        } else if predicates.types.contains(p) {
            Kind::Type
        } else {
            stats.skipped += 1;
            continue;
        };
        stats.accepted += 1;
        pairs.push((kind, resource_key(s), resource_key(o)));
    }
    Ok((pairs, stats))
}

/// Loads category and type assertions from N-Triples files (optionally
/// gzip-compressed). Files are parsed concurrently; the index is then built
/// by a single writer.
pub fn load_ntriples(paths: &[PathBuf], predicates: &PredicateConfig) -> Result<(SemanticIndex, LoadStats)> {
    let parsed = par::map(paths, |p| parse_file(p, predicates));
    let mut index = SemanticIndex::default();
    let mut stats = LoadStats::default();
    for result in parsed {
        let (pairs, s) = result?;
        stats.files += s.files;
        stats.lines += s.lines;
        stats.accepted += s.accepted;
        stats.skipped += s.skipped;
        stats.malformed += s.malformed;
        for (kind, subject, object) in pairs {
            match kind {
                Kind::Category => index.insert_category(&subject, &object),
                Kind::Type => index.insert_type(&subject, &object),
            }
        }
    }
    Ok((index, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_iri_triples() {
        let (s, p, o) = parse_triple("<http://a/resource/X> <http://p> <http://o> .").unwrap();
        assert_eq!(s, Term::Iri("http://a/resource/X"));
        assert_eq!(p, Term::Iri("http://p"));
        assert_eq!(o, Term::Iri("http://o"));
    }

    #[test]
    fn literals_and_blank_nodes_are_not_iris() {
        let (_, _, o) = parse_triple(r#"<http://s> <http://p> "a \"q\" b"@en ."#).unwrap();
        assert_eq!(o, Term::Other);
        let (s, _, _) = parse_triple("_:b0 <http://p> <http://o> .").unwrap();
        assert_eq!(s, Term::Other);
    }

    #[test]
    fn malformed_lines() {
        assert!(parse_triple("<http://s> <http://p> <http://o>").is_none());
        assert!(parse_triple("<http://s> <http://p> .").is_none());
        assert!(parse_triple("garbage").is_none());
    }

    #[test]
    fn resource_keys() {
        assert_eq!(resource_key("http://dbpedia.org/resource/2012_Summer_Olympics"), "2012_Summer_Olympics");
        assert_eq!(
            resource_key("http://dbpedia.org/resource/Category:Sports_festivals_in_London"),
            "Category:Sports_festivals_in_London"
        );
        assert_eq!(resource_key("http://dbpedia.org/resource/Caf%C3%A9"), "Café");
        assert_eq!(resource_key("http://dbpedia.org/ontology/Event"), "http://dbpedia.org/ontology/Event");
    }

    #[test]
    fn unreadable_file_names_the_path() {
        let err = load_ntriples(&[PathBuf::from("/no/such/file.nt")], &PredicateConfig::default()).unwrap_err();
        assert!(err.to_string().contains("/no/such/file.nt"));
    }
}
