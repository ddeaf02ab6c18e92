//! Runs the synthetic benchmark and prints mean RMSE and MAPE per method.
//!
//! `cargo run --release --example benchmark -- [seed] [families]`

use std::time::Instant;

use trendcast::eval::{moving_window_eval, EvalOptions, MethodId};
use trendcast::forecast::ForecastConfig;
use trendcast::semantic::TopicSetKind;
use trendcast::synth::{generate, SynthConfig};

fn main() -> trendcast::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let families = args.next().and_then(|s| s.parse().ok()).unwrap_or(30);
    let corpus = generate(&SynthConfig {
        seed,
        families,
        ..Default::default()
    })?;
    let names = [
        "naive",
        "linear_trend",
        "average_trend",
        "median_trend",
        "nn/median_scaled/self",
        "nn/median_scaled/gen",
        "nn/median_scaled/sim",
        "nn/median_unscaled/sim",
        "nn/average_scaled/sim",
        "nn/median_scaled/sim/musigma",
        "nn/median_scaled/sim/y_invariant",
    ];
    let methods: Vec<MethodId> = names.iter().map(|n| n.parse()).collect::<Result<_, _>>()?;
    let options = EvalOptions {
        oracle: Some((TopicSetKind::Similar, ForecastConfig::default())),
        ..Default::default()
    };
    let start = Instant::now();
    let report = moving_window_eval(&corpus.sequences(), &methods, &corpus.store, &options)?;
    println!("{} sequences in {:.2?}", report.sequences.len(), start.elapsed());
    println!("{:<34} {:>10} {:>10} {:>10} {:>8} {:>8}", "method", "rmse", "rmse@0", "rmse@7", "mape@0", "mape@7");
    let fmt = |m: Option<f64>| m.map_or("-".to_string(), |v| format!("{v:.1}"));
    for (i, m) in report.methods.iter().enumerate() {
        let c = &report.curves[i];
        println!(
            "{:<34} {:>10.0} {:>10.0} {:>10.0} {:>8} {:>8}",
            m.to_string(),
            report.mean_rmse(i),
            c.rmse[0],
            c.rmse[7],
            fmt(c.mape[0]),
            fmt(c.mape[7])
        );
    }
    if let Some(c) = &report.oracle {
        println!("{:<34} {:>10} {:>10.0} {:>10.0} {:>8} {:>8}", "oracle", "", c.rmse[0], c.rmse[7], fmt(c.mape[0]), fmt(c.mape[7]));
    }
    Ok(())
}
