//! Compares the four exploration strategies over a few seeds at a reduced
//! budget and prints learning curves and rank-test p-values.
//!
//! `cargo run --release --example compare_strategies -- [budget] [seeds]`

use sagg_riac::evaluation::compare_strategies;
use sagg_riac::experiment::{ExperimentConfig, Strategy};

fn main() -> sagg_riac::Result<()> {
    let mut args = std::env::args().skip(1);
    let budget: usize = args.next().map(|b| b.parse().expect("budget")).unwrap_or(4000);
    let n_seeds: u64 = args.next().map(|s| s.parse().expect("seeds")).unwrap_or(3);

    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/arm15_mid.json");
    let base = ExperimentConfig { budget, ..ExperimentConfig::from_json(&std::fs::read_to_string(path)?)? };
    let configs: Vec<(String, ExperimentConfig)> =
        [Strategy::SaggRiac, Strategy::SaggRandom, Strategy::ActuatorRandom, Strategy::ActuatorRiac]
            .into_iter()
            .map(|s| (s.as_str().to_string(), ExperimentConfig { strategy: s, ..base.clone() }))
            .collect();
    let seeds: Vec<u64> = (1..=n_seeds).collect();
    let jobs = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let cmp = compare_strategies(&configs, &seeds, jobs)?;

    for curve in &cmp.curves {
        let points: Vec<String> = curve.points.iter().map(|p| format!("{}:{:.2}", p.checkpoint, p.mean)).collect();
        println!("{:<16} {}", curve.strategy, points.join("  "));
    }
    let last = *cmp.curves[0].points.last().map(|p| &p.checkpoint).expect("at least one checkpoint");
    for other in &configs[1..] {
        if let Some(row) = cmp.significance_at(last, &configs[0].0, &other.0) {
            println!("sagg_riac vs {:<16} mean {:.2} vs {:.2}, p = {:.3}", other.0, row.mean_a, row.mean_b, row.p);
        }
    }
    Ok(())
}
