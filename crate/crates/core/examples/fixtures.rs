//! Writes a small synthetic corpus for trying the CLI:
//! `store.tcs`, `triples.nt`, `feeds.csv`, `labels.csv` and three days of
//! hourly dumps under `dumps/`.
//!
//! `cargo run --example fixtures -- <dir> [families] [seed]`

use std::path::PathBuf;

use trendcast::store::write_store;
use trendcast::synth::{generate, write_hourly_dumps, write_ntriples, DumpDays, SynthConfig};
use trendcast::trends::io::write_feeds;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "fixtures".into()));
    let families = args.next().and_then(|s| s.parse().ok()).unwrap_or(6);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(11);
    let corpus = generate(&SynthConfig {
        families,
        seed,
        ..Default::default()
    })?;
    std::fs::create_dir_all(&dir)?;
    write_store(&dir.join("store.tcs"), &corpus.store)?;
    write_ntriples(&dir.join("triples.nt"), &corpus.index)?;
    write_feeds(&dir.join("feeds.csv"), &corpus.feeds())?;
    let labels: String = corpus.labels().iter().map(|(l, c)| format!("{l},{c}\n")).collect();
    std::fs::write(dir.join("labels.csv"), labels)?;

    let family = &corpus.families[0];
    let event = family.target_event();
    let dumps: DumpDays = family
        .instances
        .iter()
        .chain(&family.related)
        .map(|uri| {
            let totals = (event..event + 3)
                .map(|d| corpus.store.value(uri, d).map(|v| Some(v as u64)))
                .collect::<trendcast::Result<_>>()?;
            Ok((uri.clone(), totals))
        })
        .collect::<trendcast::Result<_>>()?;
    let files = write_hourly_dumps(&dir.join("dumps"), corpus.store.date_of(event), &dumps, seed)?;
    println!(
        "{}: {} series, {} feed entries, {} dump files",
        dir.display(),
        corpus.store.len(),
        corpus.feeds().len(),
        files.len()
    );
    Ok(())
}
