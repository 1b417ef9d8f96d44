//! Writes a run directory, then reloads it: re-evaluation of the stored
//! memory and a per-checkpoint summary of the region snapshots.
//!
//! `cargo run --release --example run_directory -- [output dir]`

use std::path::PathBuf;

use sagg_riac::harness::{cmd_eval, cmd_regions, cmd_run, load_config, Overrides};

fn main() {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("sagg_run_example"));
    let path = PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/arm15_mid.json"));
    let outcome = (|| {
        let cfg = Overrides { budget: Some(3000), ..Overrides::default() }.apply(&load_config(&path)?)?;
        let manifest = cmd_run(&cfg, &dir)?;
        println!("wrote {} ({} actions): {}", dir.display(), manifest.actions, manifest.files.join(", "));
        let report = cmd_eval(&dir)?;
        println!(
            "re-evaluated on {} test goals: error {:.3} (staying at rest: {:.3})",
            report.goals, report.mean_error, report.rest_error
        );
        for s in cmd_regions(&dir)? {
            println!(
                "checkpoint {:>5}: {:>3} leaves, {:>3} touch the reachable disk, max interest {:.3}",
                s.checkpoint, s.leaves, s.reachable_leaves, s.max_interest
            );
        }
        Ok::<_, sagg_riac::harness::CliError>(())
    })();
    if let Err(e) = outcome {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
