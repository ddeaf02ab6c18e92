//! Seeded synthetic corpora: recurring two-peak events with noise, their
//! semantic annotations, trend feeds and hourly dump files.
//!
//! Each family is an annual event. It has one article per yearly instance
//! (`Name_2010`, `Name_2011`, ...) and a few related articles that rise with
//! every instance. The last instance is the forecasting target. Its earlier
//! instances and related articles share its event shape and its categories,
//! so they surface as semantic neighbours.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{Datelike, Days, NaiveDate};
use flate2::write::GzEncoder;
use flate2::Compression;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use crate::eval::EvalSequence;
use crate::semantic::{build_topic_set, SemanticIndex, TopicSetKind, DCTERMS_SUBJECT, RDF_TYPE, SIMILAR_LIMIT};
use crate::store::SeriesStore;
use crate::trends::RawTrendEntry;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub families: usize,
    /// Yearly instances per family; the last one is the target.
    pub years: usize,
    pub related: usize,
    pub first: NaiveDate,
    pub days: usize,
    /// Log-normal sigma of the multiplicative daily noise.
    pub noise: f64,
    /// Families per group; a group shares one type annotation.
    pub group_size: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            families: 30,
            years: 3,
            related: 2,
            first: NaiveDate::from_ymd_opt(2010, 1, 1).unwrap(),
            days: 1100,
            noise: 0.1,
            group_size: 10,
            seed: 7,
        }
    }
}

/// Shape of one family's events, in units of the event amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct EventShape {
    pub ramp_rate: f64,
    pub decay: f64,
    pub second_gap: usize,
    pub second_height: f64,
}

impl EventShape {
    const RAMP_DAYS: i64 = 8;

    /// Relative level `offset` days after the first peak.
    pub fn at(&self, offset: i64) -> f64 {
        if offset < -Self::RAMP_DAYS {
            0.0
        } else if offset < 0 {
            0.3 * (-self.ramp_rate * (-offset - 1) as f64).exp()
        } else {
            let k = offset as f64;
            let mut v = (-self.decay * k).exp();
            let gap = self.second_gap as i64;
            if offset >= gap {
                v += self.second_height * (-self.decay * (offset - gap) as f64).exp();
            }
            v
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthFamily {
    pub name: String,
    pub group: usize,
    pub shape: EventShape,
    /// Article per yearly instance, oldest first.
    pub instances: Vec<String>,
    pub related: Vec<String>,
    /// Day index of the first peak of each instance.
    pub events: Vec<i64>,
}

impl SynthFamily {
    pub fn target(&self) -> &str {
        self.instances.last().expect("family without instances")
    }

    pub fn target_event(&self) -> i64 {
        *self.events.last().expect("family without events")
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub config: SynthConfig,
    pub store: SeriesStore,
    pub index: SemanticIndex,
    pub families: Vec<SynthFamily>,
}

const SYLLABLES: &[&str] = &[
    "ar", "bel", "cor", "dan", "el", "fin", "gal", "hol", "ir", "jun", "kas", "lor", "mer", "nov",
    "or", "pal", "quin", "ros", "sal", "tor", "ul", "ven", "wil", "xan", "yor", "zel",
];
const KINDS: &[&str] = &["Cup", "Festival", "Awards", "Games", "Open", "Summit", "Expo", "Marathon"];

fn family_name(rng: &mut ChaCha8Rng, taken: &mut Vec<String>) -> String {
    loop {
        let n = rng.random_range(2..=3);
        let mut word: String = (0..n).map(|_| SYLLABLES[rng.random_range(0..SYLLABLES.len())]).collect();
        word[..1].make_ascii_uppercase();
        let name = format!("{word}_{}", KINDS[rng.random_range(0..KINDS.len())]);
        let stem = word.to_ascii_lowercase();
        // keep stems far apart so feed variants never merge across families
        let clash = taken
            .iter()
            .any(|t| crate::trends::levenshtein(t, &stem) < 3);
        if !clash {
            taken.push(stem);
            return name;
        }
    }
}

/// Builds a corpus from `config`. Deterministic in the seed.
pub fn generate(config: &SynthConfig) -> Result<SynthCorpus> {
    let min_days = 365 * config.years.saturating_sub(1) + 130;
    if config.families == 0 || config.years == 0 || config.days < min_days || config.group_size == 0 {
        return Err(Error::Config(format!(
            "synthetic corpus needs families, years and at least {min_days} days"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = LogNormal::new(0.0, config.noise).map_err(|e| Error::Config(e.to_string()))?;
    let days = config.days as i64;
    let last = config.first + Days::new(config.days as u64 - 1);
    let mut store = SeriesStore::new(config.first, last)?;
    let mut index = SemanticIndex::default();
    let mut families = Vec::with_capacity(config.families);
    let mut taken = Vec::new();
    // the last instance must leave room for a two-week horizon
    let latest_day = days - 365 * (config.years as i64 - 1) - 20;

    for f in 0..config.families {
        let name = family_name(&mut rng, &mut taken);
        let group = f / config.group_size;
        let shape = EventShape {
            ramp_rate: rng.random_range(0.35..0.8),
            decay: rng.random_range(0.25..0.7),
            second_gap: rng.random_range(2..=6),
            second_height: rng.random_range(0.3..0.9),
        };
        let day_of_year = rng.random_range(100..latest_day.min(365));
        let background = rng.random_range(200.0..2000.0);
        let amplitude = rng.random_range(2e4..2e5);
        let events: Vec<i64> = (0..config.years as i64)
            .map(|y| (day_of_year + 365 * y + rng.random_range(-3..=3)).clamp(70, days - 16))
            .collect();
        let instance_amp: Vec<f64> = events.iter().map(|_| amplitude * rng.random_range(0.6..1.6)).collect();

        let mut series = |uri: &str, level: f64, bumps: &[(i64, f64)], rng: &mut ChaCha8Rng| -> Result<()> {
            let values = (0..days)
                .map(|d| {
                    let weekly = 1.0 + 0.1 * (2.0 * std::f64::consts::PI * d as f64 / 7.0).sin();
                    let mut v = level * weekly;
                    for &(e, a) in bumps {
                        v += a * shape.at(d - e);
                    }
                    (v * noise.sample(rng)).round()
                })
                .collect();
            store.insert(crate::store::DailySeries::new(uri, config.first, values))
        };

        let year0 = config.first.year();
        let mut instances = Vec::new();
        for (y, (&e, &a)) in events.iter().zip(&instance_amp).enumerate() {
            let year = year0 + y as i32;
            let uri = format!("{name}_{year}");
            series(&uri, background * rng.random_range(0.5..1.5), &[(e, a)], &mut rng)?;
            index.insert_category(&uri, &name);
            index.insert_category(&uri, &format!("{name}_events"));
            index.insert_category(&uri, &format!("{year}_events"));
            index.insert_type(&uri, &format!("Group{group}Event"));
            instances.push(uri);
        }
        let mut related = Vec::new();
        for j in 0..config.related {
            let uri = format!("{name}_{}", ["history", "venue", "records", "teams"][j % 4]);
            let uri = if j >= 4 { format!("{uri}_{j}") } else { uri };
            let bumps: Vec<(i64, f64)> = events
                .iter()
                .zip(&instance_amp)
                .map(|(&e, &a)| (e, 0.3 * a * rng.random_range(0.5..1.5)))
                .collect();
            series(&uri, background * rng.random_range(0.5..2.0), &bumps, &mut rng)?;
            index.insert_category(&uri, &name);
            index.insert_type(&uri, &format!("Group{group}Event"));
            related.push(uri);
        }
        families.push(SynthFamily {
            name,
            group,
            shape,
            instances,
            related,
            events,
        });
    }
    Ok(SynthCorpus {
        config: config.clone(),
        store,
        index,
        families,
    })
}

impl SynthCorpus {
    /// The general pool: every family's target.
    pub fn general(&self) -> Vec<String> {
        self.families.iter().map(|f| f.target().to_string()).collect()
    }

    /// One sequence per family, triggered two days before the target's
    /// first peak, with all three topic pools and the group as category.
    pub fn sequences(&self) -> Vec<EvalSequence> {
        let general = self.general();
        self.families
            .iter()
            .map(|f| {
                let target = f.target();
                let topic_sets = [TopicSetKind::Itself, TopicSetKind::General, TopicSetKind::Similar]
                    .into_iter()
                    .map(|kind| {
                        let set = build_topic_set(kind, target, &self.index, &general, SIMILAR_LIMIT);
                        (kind, set.members)
                    })
                    .collect::<BTreeMap<_, _>>();
                EvalSequence {
                    id: target.to_string(),
                    uri: target.to_string(),
                    trigger: f.target_event() - 2,
                    categories: vec![format!("group_{}", f.group)],
                    topic_sets,
                }
            })
            .collect()
    }

    /// Feed entries for the target events: three feeds that pick a topic up
    /// at different delays and spell it differently.
    pub fn feeds(&self) -> Vec<RawTrendEntry> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ 0xfeed);
        let channels = [("news", -2i64, 6i64), ("search", -1, 7), ("social", 0, 4)];
        let mut by_day: BTreeMap<(i64, &str), Vec<(f64, String)>> = BTreeMap::new();
        for f in &self.families {
            let e = f.target_event();
            let year = f.target().rsplit('_').next().unwrap_or_default();
            let words = f.name.replace('_', " ");
            let variants = [
                format!("{words} {year}"),
                format!("{} {year}", words.to_lowercase()),
                format!("{} {year}", words.replace(' ', "")),
            ];
            for (c, &(channel, from, to)) in channels.iter().enumerate() {
                for d in e + from..=e + to {
                    let strength = f.shape.at(d - e) * rng.random_range(0.8..1.2);
                    by_day
                        .entry((d, channel))
                        .or_default()
                        .push((strength, variants[c].clone()));
                }
            }
        }
        let mut out = Vec::new();
        for ((d, channel), mut topics) in by_day {
            topics.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
            for (rank, (_, topic)) in topics.into_iter().enumerate() {
                out.push(RawTrendEntry {
                    date: self.store.date_of(d),
                    channel: channel.to_string(),
                    rank: rank as u32 + 1,
                    topic,
                });
            }
        }
        out
    }

    /// Feed-group label file rows `label,category` keyed by the normalized
    /// target title, one category per family group.
    pub fn labels(&self) -> Vec<(String, String)> {
        self.families
            .iter()
            .map(|f| (crate::trends::normalize_topic(f.target()), format!("group_{}", f.group)))
            .collect()
    }
}

/// Writes the category and type annotations of `index` as N-Triples.
pub fn write_ntriples(path: &Path, index: &SemanticIndex) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res = "http://dbpedia.org/resource/";
    for uri in index.uris() {
        for c in index.categories(uri) {
            writeln!(w, "<{res}{uri}> <{DCTERMS_SUBJECT}> <{res}Category:{c}> .").map_err(|e| Error::io(path, e))?;
        }
        for t in index.types(uri) {
            writeln!(w, "<{res}{uri}> <{RDF_TYPE}> <http://dbpedia.org/ontology/{t}> .")
                .map_err(|e| Error::io(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Splits `total` views into 24 hourly counts.
fn split_hours(total: u64, rng: &mut ChaCha8Rng) -> [u64; 24] {
    let weights: Vec<f64> = (0..24).map(|_| rng.random_range(0.2..1.0)).collect();
    let sum: f64 = weights.iter().sum();
    let mut out = [0u64; 24];
    let mut assigned = 0;
    for (h, w) in weights.iter().enumerate() {
        out[h] = (total as f64 * w / sum).floor() as u64;
        assigned += out[h];
    }
    for i in 0..(total - assigned) as usize {
        out[i % 24] += 1;
    }
    out
}

/// Daily totals for one article in a dump fixture; `None` writes no line.
pub type DumpDays = BTreeMap<String, Vec<Option<u64>>>;

/// Writes gzipped hourly dump files `pagecounts-YYYYMMDD-HH0000.gz` for the
/// days starting at `first`, with the given daily totals split over hours.
/// Adds lines of another project and a malformed line to every file.
/// Returns the written paths in chronological order.
pub fn write_hourly_dumps(dir: &Path, first: NaiveDate, days: &DumpDays, seed: u64) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let n = days.values().map(Vec::len).max().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // hours[article][day] = 24 counts
    let hours: BTreeMap<&str, Vec<Option<[u64; 24]>>> = days
        .iter()
        .map(|(uri, totals)| {
            let split = totals.iter().map(|t| t.map(|t| split_hours(t, &mut rng))).collect();
            (uri.as_str(), split)
        })
        .collect();
    let mut paths = Vec::with_capacity(n * 24);
    for d in 0..n {
        let date = first + Days::new(d as u64);
        for h in 0..24 {
            let path = dir.join(format!("pagecounts-{}-{h:02}0000.gz", date.format("%Y%m%d")));
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut w = GzEncoder::new(BufWriter::new(file), Compression::fast());
            let mut put = |line: String| writeln!(w, "{line}").map_err(|e| Error::io(&path, e));
            for (uri, split) in &hours {
                if let Some(Some(counts)) = split.get(d) {
                    if counts[h] > 0 {
                        // spaces in titles are written as underscores, some percent-encoded
                        let title = if h % 2 == 0 { uri.to_string() } else { uri.replace('_', "%20") };
                        put(format!("en {title} {} {}", counts[h], counts[h] * 512))?;
                    }
                    put(format!("de {uri} 3 100"))?;
                }
            }
            put("en broken_line_without_counts".into())?;
            w.finish()
                .and_then(|mut b| b.flush())
                .map_err(|e| Error::io(&path, e))?;
            paths.push(path);
        }
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{ingest_files, IngestOptions};

    #[test]
    fn corpus_is_deterministic_and_consistent() {
        let cfg = SynthConfig {
            families: 4,
            ..Default::default()
        };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a.store, b.store);
        assert_eq!(a.store.len(), 4 * 5);
        for f in &a.families {
            assert!(f.target_event() + 14 < cfg.days as i64);
            let sim = &a.sequences().into_iter().find(|s| s.uri == f.target()).unwrap().topic_sets[&TopicSetKind::Similar];
            assert_eq!(sim[0], f.target());
            for other in f.instances.iter().chain(&f.related) {
                assert!(sim.contains(other));
            }
        }
    }

    #[test]
    fn shape_peaks_at_the_event() {
        let s = EventShape {
            ramp_rate: 0.5,
            decay: 0.5,
            second_gap: 3,
            second_height: 0.5,
        };
        assert_eq!(s.at(0), 1.0);
        assert_eq!(s.at(-9), 0.0);
        assert!(s.at(-1) < s.at(0) && s.at(-3) < s.at(-1));
        assert!(s.at(3) > s.at(2));
    }

    #[test]
    fn hours_sum_to_the_day() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for total in [0, 1, 23, 24, 25, 1000, 123_457] {
            assert_eq!(split_hours(total, &mut rng).iter().sum::<u64>(), total);
        }
    }

    #[test]
    fn dumps_ingest_back() {
        let dir = tempfile::tempdir().unwrap();
        let first = NaiveDate::from_ymd_opt(2012, 3, 1).unwrap();
        let days: DumpDays = [("Some_Page".to_string(), vec![Some(100), Some(30), Some(70)])].into();
        let paths = write_hourly_dumps(dir.path(), first, &days, 3).unwrap();
        assert_eq!(paths.len(), 72);
        let options = IngestOptions {
            projects: Some(["en".to_string()].into()),
            ..Default::default()
        };
        let (store, stats) = ingest_files(&paths, &options).unwrap();
        assert_eq!(store.get("Some_Page").unwrap().values, vec![100.0, 30.0, 70.0]);
        assert_eq!(stats.malformed_lines, 72);
    }
}
