use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sagg_riac::experiment::Strategy;
use sagg_riac::harness::{self, CliError, CliResult, Overrides};

/// Competence-progress driven goal babbling experiments.
#[derive(Parser)]
#[command(name = "sagg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunOverrides {
    /// Replace the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Replace the config's action (or rollout) budget.
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its log directory.
    Run {
        config: PathBuf,
        /// Output directory; defaults to $SAGG_OUTPUT_DIR/<name>_<strategy>_s<seed>.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = parse_strategy)]
        strategy: Option<Strategy>,
        #[command(flatten)]
        overrides: RunOverrides,
    },
    /// Re-evaluate the memory stored in a run directory.
    Eval { run_dir: PathBuf },
    /// Run several strategies over several seeds and test the differences.
    Compare {
        config: PathBuf,
        /// Comma-separated strategies; all four by default.
        #[arg(long, value_delimiter = ',', value_parser = parse_strategy)]
        strategies: Vec<Strategy>,
        /// `1..15` or `1,2,3`.
        #[arg(long, default_value = "1..15")]
        seeds: String,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Validate and summarize the region snapshots of a run directory.
    Regions { run_dir: PathBuf },
    /// Write the test database of a config.
    Testdb {
        config: PathBuf,
        #[arg(long, default_value = "test_db.csv")]
        out: PathBuf,
    },
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown strategy {s:?}; expected sagg_riac, sagg_random, actuator_random or actuator_riac"))
}

fn print_csv<T: serde::Serialize>(rows: &[T]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(std::io::stdout());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Runtime(e.into()))?;
    }
    w.flush().map_err(|e| CliError::Runtime(e.into()))
}

fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Run { config, out, strategy, overrides } => {
            let base = harness::load_config(&config)?;
            let cfg = Overrides { seed: overrides.seed, budget: overrides.budget, strategy }.apply(&base)?;
            let dir = out.unwrap_or_else(|| harness::default_run_dir(&cfg));
            let manifest = harness::cmd_run(&cfg, &dir)?;
            match manifest.final_error {
                Some(e) => println!("{}: {} actions, final error {e:.4}", dir.display(), manifest.actions),
                None => println!("{}: {} actions", dir.display(), manifest.actions),
            }
        }
        Command::Eval { run_dir } => {
            let report = harness::cmd_eval(&run_dir)?;
            println!("{}", serde_json::to_string(&report).map_err(|e| CliError::Runtime(e.into()))?);
        }
        Command::Compare { config, strategies, seeds, jobs, out, budget } => {
            let base = harness::load_config(&config)?;
            let cfg = Overrides { budget, ..Overrides::default() }.apply(&base)?;
            let strategies = if strategies.is_empty() {
                vec![Strategy::SaggRiac, Strategy::SaggRandom, Strategy::ActuatorRandom, Strategy::ActuatorRiac]
            } else {
                strategies
            };
            let seeds = harness::parse_seeds(&seeds)?;
            let dir = out.unwrap_or_else(|| {
                let root = std::env::var_os(harness::OUTPUT_ENV).map(PathBuf::from).unwrap_or_else(|| "runs".into());
                root.join(format!("{}_compare", if cfg.name.is_empty() { "run" } else { &cfg.name }))
            });
            let comparison = harness::cmd_compare(&cfg, &strategies, &seeds, jobs, &dir)?;
            for curve in &comparison.curves {
                if let Some(last) = curve.points.last() {
                    println!("{:<16} final error {:.4} +- {:.4}", curve.strategy, last.mean, last.std);
                }
            }
            println!("wrote {}", dir.display());
        }
        Command::Regions { run_dir } => print_csv(&harness::cmd_regions(&run_dir)?)?,
        Command::Testdb { config, out } => {
            let cfg = harness::load_config(&config)?;
            let n = harness::cmd_testdb(&cfg, &out)?;
            println!("wrote {n} goals to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sagg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
