//! One SAGG-RIAC run on the bundled desk-scale arm config.
//!
//! `cargo run --release --example run_experiment -- [budget]` (default 5000
//! micro-actions; the config's full budget is 30000).

use sagg_riac::evaluation::{fraction_thirds, interest_goals};
use sagg_riac::experiment::{run_experiment, ExperimentConfig, World};
use sagg_riac::regions::GoalOrigin;

fn main() -> sagg_riac::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/arm15_mid.json");
    let mut cfg = ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?;
    cfg.budget = std::env::args().nth(1).map(|b| b.parse().expect("budget must be an integer")).unwrap_or(5000);
    cfg.validate()?;

    let result = run_experiment(&cfg)?;
    let log = &result.log;
    let goals = log.attempts.iter().filter(|a| a.origin == GoalOrigin::SelfGenerated).count();
    println!("{} micro-actions, {} goals, {} attempts incl. subgoals", log.actions, goals, log.attempts.len());
    for e in &log.evaluations {
        println!("checkpoint {:>6}: mean test error {:.3}", e.checkpoint, e.mean_error);
    }
    if let Some(tree) = &result.tree {
        println!("region tree: {} leaves, {} records", tree.leaves().len(), tree.total_records());
    }
    let reach = World::from_config(&cfg)?.reach();
    if let (Some(first), Some(last)) = fraction_thirds(log, &reach) {
        println!(
            "interest-driven goals: {}, reachable share first third {first:.2}, last third {last:.2}",
            interest_goals(&log.goals).len()
        );
    }
    Ok(())
}
