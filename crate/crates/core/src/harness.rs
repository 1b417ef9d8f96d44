//! Config files, run directories and the operations behind the `sagg` binary.
//!
//! A run directory holds `manifest.json` (resolved config, seed, file list)
//! next to the CSV logs, which is enough to re-run or re-evaluate it.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::Reachability;
use crate::evaluation::{compare_strategies, evaluate, make_test_db, rest_error, write_test_db_csv, Comparison};
use crate::experiment::{run_experiment, ExperimentConfig, RunResult, Strategy, World};
use crate::memory::SensorimotorMemory;
use crate::space::{point, Bounds};
use crate::Error;

/// Environment variable naming the default output root.
pub const OUTPUT_ENV: &str = "SAGG_OUTPUT_DIR";
const DEFAULT_OUTPUT: &str = "runs";
const AREA_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime failure: {0}")]
    Runtime(#[from] Error),
}

impl CliError {
    /// 1 for anything the user can fix in the config or arguments, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn runtime<E: Into<Error>>(e: E) -> CliError {
    CliError::Runtime(e.into())
}

/// Parses and validates a config file. JSON errors carry line and column.
pub fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| {
        CliError::Config(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
    })?;
    cfg.validate().map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

/// Command-line replacements for config fields.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub budget: Option<usize>,
    pub strategy: Option<Strategy>,
}

impl Overrides {
    pub fn apply(&self, cfg: &ExperimentConfig) -> CliResult<ExperimentConfig> {
        let mut cfg = cfg.clone();
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(budget) = self.budget {
            cfg.budget = budget;
        }
        if let Some(strategy) = self.strategy {
            cfg.strategy = strategy;
        }
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub seed: u64,
    pub strategy: Strategy,
    pub actions: usize,
    pub final_error: Option<f64>,
    pub files: Vec<String>,
    pub config: ExperimentConfig,
}

/// `$SAGG_OUTPUT_DIR/<name>_<strategy>_s<seed>`, falling back to `runs/`.
pub fn default_run_dir(cfg: &ExperimentConfig) -> PathBuf {
    let root = std::env::var_os(OUTPUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));
    let name = if cfg.name.is_empty() { "run" } else { &cfg.name };
    root.join(format!("{name}_{}_s{}", cfg.strategy.as_str(), cfg.seed))
}

fn create(dir: &Path, name: &str) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name)).map_err(runtime)?))
}

/// Writes every log of `result` plus the manifest into `dir`.
pub fn write_run(dir: &Path, cfg: &ExperimentConfig, result: &RunResult) -> CliResult<Manifest> {
    fs::create_dir_all(dir).map_err(runtime)?;
    let log = &result.log;
    log.write_attempts_csv(create(dir, "attempts.csv")?)?;
    log.write_goals_csv(create(dir, "goals.csv")?)?;
    log.write_regions_csv(create(dir, "regions.csv")?)?;
    log.write_memory_sizes_csv(create(dir, "memory_sizes.csv")?)?;
    log.write_evaluations_csv(create(dir, "evaluations.csv")?)?;
    result.memory.write_csv(create(dir, "memory.csv")?)?;
    let files = ["attempts.csv", "goals.csv", "regions.csv", "memory_sizes.csv", "evaluations.csv", "memory.csv"];
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        strategy: cfg.strategy,
        actions: log.actions,
        final_error: log.evaluations.last().map(|e| e.mean_error),
        files: files.iter().map(|f| f.to_string()).collect(),
        config: cfg.clone(),
    };
    serde_json::to_writer_pretty(create(dir, "manifest.json")?, &manifest).map_err(runtime)?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> CliResult<Manifest> {
    let path = dir.join("manifest.json");
    let file = File::open(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| CliError::Config(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))
}

/// Runs one experiment and writes its directory.
pub fn cmd_run(cfg: &ExperimentConfig, dir: &Path) -> CliResult<Manifest> {
    let result = run_experiment(cfg)?;
    write_run(dir, cfg, &result)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport {
    pub goals: usize,
    pub mean_error: f64,
    /// Error of never moving from rest, for scale.
    pub rest_error: f64,
}

/// Re-evaluates the memory stored in a run directory on its test database.
pub fn cmd_eval(dir: &Path) -> CliResult<EvalReport> {
    let manifest = read_manifest(dir)?;
    let cfg = &manifest.config;
    let file = File::open(dir.join("memory.csv")).map_err(runtime)?;
    let memory = SensorimotorMemory::read_csv(BufReader::new(file), cfg.memory.clone())?;
    let world = World::from_config(cfg)?;
    let db = make_test_db(&world.reach(), &cfg.task_space, &cfg.test_db)?;
    Ok(EvalReport {
        goals: db.goals.len(),
        mean_error: evaluate(&memory, &world, &db, &cfg.reaching, &cfg.competence),
        rest_error: rest_error(&world, &db),
    })
}

/// Accepts `a..b` (inclusive) or a comma-separated list.
pub fn parse_seeds(text: &str) -> CliResult<Vec<u64>> {
    let bad = || CliError::Config(format!("cannot parse seeds {text:?}; use 1..15 or 1,2,3"));
    let seeds: Vec<u64> = if let Some((a, b)) = text.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        (a..=b).collect()
    } else {
        text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect::<CliResult<_>>()?
    };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

#[derive(Debug, Serialize)]
struct CompareManifest<'a> {
    version: &'a str,
    seeds: &'a [u64],
    strategies: Vec<&'a str>,
    config: &'a ExperimentConfig,
}

/// Runs `strategies` on the shared environment of `cfg` and writes
/// `curves.csv`, `summary.csv`, `significance.csv` and `fraction.csv`.
pub fn cmd_compare(
    cfg: &ExperimentConfig,
    strategies: &[Strategy],
    seeds: &[u64],
    jobs: usize,
    dir: &Path,
) -> CliResult<Comparison> {
    let configs: Vec<(String, ExperimentConfig)> = strategies
        .iter()
        .map(|&s| (s.as_str().to_string(), ExperimentConfig { strategy: s, ..cfg.clone() }))
        .collect();
    let comparison = compare_strategies(&configs, seeds, jobs).map_err(|e| match e {
        Error::Config(m) => CliError::Config(m),
        e => CliError::Runtime(e),
    })?;
    fs::create_dir_all(dir).map_err(runtime)?;
    comparison.write_curves_csv(create(dir, "curves.csv")?)?;
    comparison.write_summary_csv(create(dir, "summary.csv")?)?;
    comparison.write_significance_csv(create(dir, "significance.csv")?)?;
    comparison.write_fraction_csv(create(dir, "fraction.csv")?)?;
    let manifest = CompareManifest {
        version: env!("CARGO_PKG_VERSION"),
        seeds,
        strategies: strategies.iter().map(|s| s.as_str()).collect(),
        config: cfg,
    };
    serde_json::to_writer_pretty(create(dir, "manifest.json")?, &manifest).map_err(runtime)?;
    Ok(comparison)
}

/// Writes the test database of `cfg` as CSV.
pub fn cmd_testdb(cfg: &ExperimentConfig, path: &Path) -> CliResult<usize> {
    let world = World::from_config(cfg)?;
    let db = make_test_db(&world.reach(), &cfg.task_space, &cfg.test_db)?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(runtime)?;
    }
    write_test_db_csv(&db, BufWriter::new(File::create(path).map_err(runtime)?))?;
    Ok(db.goals.len())
}

#[derive(Debug, Clone, Deserialize)]
struct LeafRow {
    checkpoint: usize,
    actions: usize,
    lo_x: f64,
    lo_y: f64,
    hi_x: f64,
    hi_y: f64,
    interest: f64,
    count: usize,
}

/// Per-checkpoint summary of a region snapshot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionSummary {
    pub checkpoint: usize,
    pub actions: usize,
    pub leaves: usize,
    /// Leaves whose box meets the reachable set.
    pub reachable_leaves: usize,
    pub unreachable_leaves: usize,
    pub max_interest: f64,
    pub records: usize,
}

/// Checks that `leaves` are interior-disjoint boxes inside `root` whose areas
/// add up to the root's.
pub fn check_tiling(root: &Bounds, leaves: &[Bounds]) -> std::result::Result<(), String> {
    let scale = root.volume();
    for (i, b) in leaves.iter().enumerate() {
        if (0..root.dim()).any(|j| b.lo[j] < root.lo[j] || b.hi[j] > root.hi[j] || b.lo[j] > b.hi[j]) {
            return Err(format!("leaf {i} leaves the task space"));
        }
        for (k, c) in leaves.iter().enumerate().skip(i + 1) {
            if b.overlap(c) > AREA_TOLERANCE * scale {
                return Err(format!("leaves {i} and {k} overlap"));
            }
        }
    }
    let total: f64 = leaves.iter().map(Bounds::volume).sum();
    if (total - scale).abs() > AREA_TOLERANCE * scale * leaves.len().max(1) as f64 {
        return Err(format!("leaf areas sum to {total}, task space has {scale}"));
    }
    Ok(())
}

/// Loads `regions.csv`, validates the tiling at every checkpoint and
/// summarizes each snapshot.
pub fn cmd_regions(dir: &Path) -> CliResult<Vec<RegionSummary>> {
    let manifest = read_manifest(dir)?;
    let cfg = &manifest.config;
    let path = dir.join("regions.csv");
    let mut reader = csv::Reader::from_path(&path).map_err(runtime)?;
    let mut by_checkpoint: BTreeMap<usize, Vec<LeafRow>> = BTreeMap::new();
    for row in reader.deserialize() {
        let row: LeafRow = row.map_err(runtime)?;
        by_checkpoint.entry(row.checkpoint).or_default().push(row);
    }
    if by_checkpoint.is_empty() {
        let why = if cfg.strategy.is_goal_babbling() {
            "the run reached no checkpoint"
        } else {
            "actuator-space strategies keep no task-space tree"
        };
        return Err(CliError::Runtime(Error::Format(format!("{} has no region snapshots: {why}", path.display()))));
    }
    let world = World::from_config(cfg)?;
    let reach = world.reach();
    let origin = point(&[0.0, 0.0]);
    let mut out = Vec::new();
    for (checkpoint, rows) in by_checkpoint {
        let boxes: Vec<Bounds> =
            rows.iter().map(|r| Bounds { lo: vec![r.lo_x, r.lo_y], hi: vec![r.hi_x, r.hi_y] }).collect();
        check_tiling(&cfg.task_space, &boxes)
            .map_err(|m| CliError::Runtime(Error::Format(format!("checkpoint {checkpoint}: {m}"))))?;
        let reachable = boxes.iter().filter(|b| reach.is_reachable(&b.clamp(&origin))).count();
        out.push(RegionSummary {
            checkpoint,
            actions: rows[0].actions,
            leaves: boxes.len(),
            reachable_leaves: reachable,
            unreachable_leaves: boxes.len() - reachable,
            max_interest: rows.iter().map(|r| r.interest).fold(0.0, f64::max),
            records: rows.iter().map(|r| r.count).sum(),
        });
    }
    Ok(out)
}
