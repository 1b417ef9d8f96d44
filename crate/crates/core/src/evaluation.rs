//! Test databases, reaching-error evaluation and cross-seed statistics.

use std::io::Write;
use std::ops::Range;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::competence::CompetenceConfig;
use crate::env::{EpisodicEnv, MicroActionEnv, Reachability};
use crate::experiment::{run_experiment_with_db, ExperimentConfig, GoalEvent, RunLog, World};
use crate::explore::{reach_exploit, reach_fixed_exploit, ReachingParams};
use crate::memory::SensorimotorMemory;
use crate::regions::GoalMode;
use crate::rng::{stream, Stream};
use crate::space::{Bounds, Point};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestDbSpec {
    pub seed: u64,
    #[serde(default = "d_count")]
    pub count: usize,
}

fn d_count() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestDatabase {
    pub spec: TestDbSpec,
    pub goals: Vec<Point>,
}

const MIN_EFFICIENCY: f64 = 1e-4;
const EFFICIENCY_PROBE: u64 = 100_000;

/// Uniform rejection sample of reachable points inside the task box.
pub fn make_test_db(reach: &dyn Reachability, task: &Bounds, spec: &TestDbSpec) -> Result<TestDatabase> {
    let mut goals = Vec::with_capacity(spec.count);
    if spec.count == 0 {
        return Ok(TestDatabase { spec: spec.clone(), goals });
    }
    let region = task.intersection(&reach.reachable_box()).ok_or(Error::SamplerEfficiency(0.0))?;
    let mut rng = stream(spec.seed, Stream::TestDatabase);
    let mut tries = 0u64;
    while goals.len() < spec.count {
        let p = region.sample(&mut rng);
        tries += 1;
        if reach.is_reachable(&p) && task.contains(&p) {
            goals.push(p);
        }
        if tries >= EFFICIENCY_PROBE {
            let efficiency = goals.len() as f64 / tries as f64;
            if efficiency < MIN_EFFICIENCY {
                return Err(Error::SamplerEfficiency(efficiency));
            }
        }
    }
    Ok(TestDatabase { spec: spec.clone(), goals })
}

pub fn write_test_db_csv<W: Write>(db: &TestDatabase, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["index", "x", "y"])?;
    for (i, g) in db.goals.iter().enumerate() {
        w.write_record([i.to_string(), g[0].to_string(), g[1].to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Mean distance between each test goal and the end of a pure-exploitation
/// reach from rest. Neither the memory nor the world is modified.
pub fn evaluate(
    memory: &SensorimotorMemory,
    world: &World,
    db: &TestDatabase,
    reaching: &ReachingParams,
    competence: &CompetenceConfig,
) -> f64 {
    if db.goals.is_empty() {
        return 0.0;
    }
    let total: f64 = match world {
        World::Arm(arm) => db
            .goals
            .iter()
            .map(|g| {
                let mut env = arm.clone();
                env.reset();
                (reach_exploit(&mut env, memory, g, reaching, competence).final_position - g).norm()
            })
            .sum(),
        World::Synergy(env) => {
            db.goals.iter().map(|g| (reach_fixed_exploit(env, memory, g, reaching) - g).norm()).sum()
        }
    };
    total / db.goals.len() as f64
}

/// Mean distance from the rest effect to the goals: the error of a system
/// that never moves.
pub fn rest_error(world: &World, db: &TestDatabase) -> f64 {
    let rest = match world {
        World::Arm(arm) => arm.rest_position(),
        World::Synergy(env) => env.rest_effect(),
    };
    db.goals.iter().map(|g| (g - &rest).norm()).sum::<f64>() / db.goals.len().max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    /// U statistic of the first sample.
    pub u: f64,
    pub z: f64,
    /// Two-sided p-value from the normal approximation with tie correction.
    pub p: f64,
}

/// Two-sided Mann-Whitney U test.
pub fn mann_whitney(a: &[f64], b: &[f64]) -> MannWhitney {
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    if a.is_empty() || b.is_empty() {
        return MannWhitney { u: 0.0, z: 0.0, p: 1.0 };
    }
    let mut all: Vec<(f64, bool)> = a.iter().map(|&x| (x, true)).chain(b.iter().map(|&x| (x, false))).collect();
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    let n = all.len();
    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        rank_sum_a += rank * all[i..=j].iter().filter(|x| x.1).count() as f64;
        i = j + 1;
    }
    let u = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
    let nn = n1 + n2;
    let var = n1 * n2 / 12.0 * ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
    if !(var > 0.0) {
        return MannWhitney { u, z: 0.0, p: 1.0 };
    }
    let diff = u - n1 * n2 / 2.0;
    // continuity correction toward zero
    let z = (diff.abs() - 0.5).max(0.0) * diff.signum() / var.sqrt();
    let normal = Normal::standard();
    let p = (2.0 * (1.0 - normal.cdf(z.abs()))).min(1.0);
    MannWhitney { u, z, p }
}

/// Self-generated goals drawn by the interest-driven modes.
pub fn interest_goals(goals: &[GoalEvent]) -> Vec<&GoalEvent> {
    goals.iter().filter(|g| matches!(g.mode, GoalMode::Interest | GoalMode::LowCompetence)).collect()
}

/// Fraction of the interest-driven goals with positions in `window` (indices
/// into that filtered list) that are reachable. `None` for an empty window.
pub fn reachable_fraction(goals: &[GoalEvent], reach: &dyn Reachability, window: Range<usize>) -> Option<f64> {
    let selected = interest_goals(goals);
    let window = window.start.min(selected.len())..window.end.min(selected.len());
    if window.is_empty() {
        return None;
    }
    let hits = selected[window.clone()].iter().filter(|g| reach.is_reachable(&g.position)).count();
    Some(hits as f64 / window.len() as f64)
}

/// Reachable fraction over the first and last thirds of a run's
/// interest-driven goals.
pub fn fraction_thirds(log: &RunLog, reach: &dyn Reachability) -> (Option<f64>, Option<f64>) {
    let n = interest_goals(&log.goals).len();
    (reachable_fraction(&log.goals, reach, 0..n / 3), reachable_fraction(&log.goals, reach, n - n / 3..n))
}

/// Monte Carlo estimate of the reachable share of the task box.
pub fn area_ratio<R: Rng + ?Sized>(reach: &dyn Reachability, task: &Bounds, samples: usize, rng: &mut R) -> f64 {
    let hits = (0..samples).filter(|_| reach.is_reachable(&task.sample(rng))).count();
    hits as f64 / samples as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub checkpoint: usize,
    pub mean: f64,
    /// Standard deviation across seeds.
    pub std: f64,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub strategy: String,
    pub points: Vec<CurvePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignificanceRow {
    pub checkpoint: usize,
    pub a: String,
    pub b: String,
    pub mean_a: f64,
    pub mean_b: f64,
    pub u: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionRow {
    pub strategy: String,
    pub seed: u64,
    pub first_third: Option<f64>,
    pub last_third: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    /// One log per (config, seed), config-major.
    pub runs: Vec<(String, RunLog)>,
    pub curves: Vec<ErrorCurve>,
    pub significance: Vec<SignificanceRow>,
    pub fractions: Vec<FractionRow>,
}

impl Comparison {
    /// Final-checkpoint errors of one labelled config, in seed order.
    pub fn final_errors(&self, label: &str) -> Vec<f64> {
        self.runs
            .iter()
            .filter(|(l, _)| l == label)
            .filter_map(|(_, log)| log.evaluations.last().map(|e| e.mean_error))
            .collect()
    }

    pub fn significance_at(&self, checkpoint: usize, a: &str, b: &str) -> Option<&SignificanceRow> {
        self.significance.iter().find(|r| r.checkpoint == checkpoint && r.a == a && r.b == b)
    }

    pub fn write_curves_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["strategy", "seed", "checkpoint", "actions", "error"])?;
        for (label, log) in &self.runs {
            for e in &log.evaluations {
                w.write_record([
                    label.clone(),
                    log.seed.to_string(),
                    e.checkpoint.to_string(),
                    e.actions.to_string(),
                    e.mean_error.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["strategy", "checkpoint", "mean", "std", "seeds"])?;
        for c in &self.curves {
            for p in &c.points {
                w.write_record([
                    c.strategy.clone(),
                    p.checkpoint.to_string(),
                    p.mean.to_string(),
                    p.std.to_string(),
                    p.seeds.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_significance_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.significance {
            w.serialize(row)?;
        }
        if self.significance.is_empty() {
            w.write_record(["checkpoint", "a", "b", "mean_a", "mean_b", "u", "p"])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_fraction_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["strategy", "seed", "first_third", "last_third"])?;
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.fractions {
            w.write_record([r.strategy.clone(), r.seed.to_string(), opt(r.first_third), opt(r.last_third)])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// Runs every labelled config under every seed on `jobs` threads, evaluating
/// all of them on the test database of the first config.
pub fn compare_strategies(configs: &[(String, ExperimentConfig)], seeds: &[u64], jobs: usize) -> Result<Comparison> {
    if configs.len() < 2 {
        return Err(Error::Config("a comparison needs at least two configs".into()));
    }
    if seeds.is_empty() {
        return Err(Error::Config("a comparison needs at least one seed".into()));
    }
    let reference = &configs[0].1;
    for (label, cfg) in configs {
        cfg.validate()?;
        if cfg.task_space != reference.task_space || cfg.arm != reference.arm || cfg.environment != reference.environment
        {
            return Err(Error::Config(format!("config {label} does not share the reference environment")));
        }
    }
    if seeds.contains(&reference.test_db.seed) {
        return Err(Error::Config(format!("run seeds must not include the test database seed {}", reference.test_db.seed)));
    }
    let world = World::from_config(reference)?;
    let db = make_test_db(&world.reach(), &reference.task_space, &reference.test_db)?;

    let jobs_list: Vec<(usize, u64)> =
        (0..configs.len()).flat_map(|c| seeds.iter().map(move |&s| (c, s))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let logs: Vec<Result<(String, RunLog)>> = pool.install(|| {
        jobs_list
            .par_iter()
            .map(|&(c, seed)| {
                let (label, cfg) = &configs[c];
                let cfg = ExperimentConfig { seed, ..cfg.clone() };
                run_experiment_with_db(&cfg, Some(&db)).map(|r| (label.clone(), r.log))
            })
            .collect()
    });
    let runs: Vec<(String, RunLog)> = logs.into_iter().collect::<Result<_>>()?;

    let labels: Vec<&String> = configs.iter().map(|(l, _)| l).collect();
    let checkpoints: Vec<usize> = runs[0].1.evaluations.iter().map(|e| e.checkpoint).collect();
    let errors_at = |label: &str, checkpoint: usize| -> Vec<f64> {
        runs.iter()
            .filter(|(l, _)| l == label)
            .filter_map(|(_, log)| log.evaluations.iter().find(|e| e.checkpoint == checkpoint).map(|e| e.mean_error))
            .collect()
    };
    let curves = labels
        .iter()
        .map(|label| ErrorCurve {
            strategy: (*label).clone(),
            points: checkpoints
                .iter()
                .map(|&checkpoint| {
                    let errs = errors_at(label, checkpoint);
                    let (mean, std) = mean_std(&errs);
                    CurvePoint { checkpoint, mean, std, seeds: errs.len() }
                })
                .collect(),
        })
        .collect();
    let mut significance = Vec::new();
    for &checkpoint in &checkpoints {
        for (i, a) in labels.iter().enumerate() {
            for b in &labels[i + 1..] {
                let (ea, eb) = (errors_at(a, checkpoint), errors_at(b, checkpoint));
                let test = mann_whitney(&ea, &eb);
                significance.push(SignificanceRow {
                    checkpoint,
                    a: (*a).clone(),
                    b: (*b).clone(),
                    mean_a: mean_std(&ea).0,
                    mean_b: mean_std(&eb).0,
                    u: test.u,
                    p: test.p,
                });
            }
        }
    }
    let reach = world.reach();
    let fractions = runs
        .iter()
        .map(|(label, log)| {
            let (first_third, last_third) = fraction_thirds(log, &reach);
            FractionRow { strategy: label.clone(), seed: log.seed, first_third, last_third }
        })
        .collect();
    Ok(Comparison { runs, curves, significance, fractions })
}
