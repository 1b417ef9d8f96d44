//! The goal-babbling loop and its baselines.
//!
//! [`run_experiment`] spends a budget of micro-actions (or rollouts) under one
//! of four strategies:
//!
//! * `sagg_riac`: goals drawn from the task-space region tree by interest;
//! * `sagg_random`: goals drawn uniformly from the task space;
//! * `actuator_random`: random micro-actions or parameters, no goals;
//! * `actuator_riac`: actions chosen by prediction-error progress over a
//!   region tree in actuator space.
//!
//! The first two reach their goals with the explorers of [`crate::explore`].

use std::collections::VecDeque;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::competence::{max_competence, CompetenceConfig};
use crate::env::{ArmEnv, ArmSpec, DiskReach, EpisodicEnv, MicroActionEnv, SynergyArm};
use crate::evaluation::{evaluate, make_test_db, TestDatabase, TestDbSpec};
use crate::explore::{make_subgoals, reach_evolving, reach_fixed, rest_reset_policy, ReachingParams, Termination};
use crate::memory::{MemoryParams, SensorimotorEntry, SensorimotorMemory};
use crate::regions::{GoalMode, GoalOrigin, LeafSnapshot, RegionParams, RegionTree};
use crate::rng::{stream, Stream, StreamRng};
use crate::space::{Bounds, Point};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    SaggRiac,
    SaggRandom,
    ActuatorRandom,
    ActuatorRiac,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::SaggRiac => "sagg_riac",
            Strategy::SaggRandom => "sagg_random",
            Strategy::ActuatorRandom => "actuator_random",
            Strategy::ActuatorRiac => "actuator_riac",
        }
    }

    pub fn is_goal_babbling(&self) -> bool {
        matches!(self, Strategy::SaggRiac | Strategy::SaggRandom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EnvironmentKind {
    /// Joint-velocity arm whose context evolves between micro-actions.
    #[default]
    MicroAction,
    /// Arm driven by one parameter vector per rollout from the rest pose.
    Episodic,
}

fn d_true() -> bool {
    true
}
fn d_subgoal_count() -> usize {
    5
}
fn d_reset_every() -> u64 {
    1
}
fn d_candidates() -> usize {
    20
}
fn d_checkpoints() -> Vec<usize> {
    vec![1000, 2000, 5000, 10_000, 20_000, 30_000]
}
fn d_test_db() -> TestDbSpec {
    TestDbSpec { seed: 1_000_003, count: 100 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub strategy: Strategy,
    #[serde(default)]
    pub environment: EnvironmentKind,
    pub arm: ArmSpec,
    pub task_space: Bounds,
    /// Micro-actions, or rollouts for episodic environments.
    pub budget: usize,
    pub seed: u64,
    #[serde(default)]
    pub regions: RegionParams,
    #[serde(default)]
    pub reaching: ReachingParams,
    #[serde(default)]
    pub competence: CompetenceConfig,
    #[serde(default)]
    pub memory: MemoryParams,
    /// Insert straight-line subgoals between the start and each goal.
    #[serde(default = "d_true")]
    pub subgoals: bool,
    /// Number of points on the path, the goal included.
    #[serde(default = "d_subgoal_count")]
    pub subgoal_count: usize,
    /// Credit every task-space point visited as a reached goal.
    #[serde(default = "d_true")]
    pub conservation: bool,
    /// Return to rest before every `reset_every`-th goal.
    #[serde(default = "d_reset_every")]
    pub reset_every: u64,
    /// Reaching attempts (goals and subgoals alike) made on uniformly drawn
    /// goals before interest is used; defaults to `2 g_max`.
    #[serde(default)]
    pub burn_in: Option<usize>,
    /// Random candidate actions scored per actuator-space selection.
    #[serde(default = "d_candidates")]
    pub riac_candidates: usize,
    #[serde(default = "d_checkpoints")]
    pub checkpoints: Vec<usize>,
    #[serde(default = "d_test_db")]
    pub test_db: TestDbSpec,
    /// Evaluate on the test database at checkpoints.
    #[serde(default = "d_true")]
    pub evaluate: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.regions.validate()?;
        self.reaching.validate()?;
        self.competence.validate()?;
        if self.task_space.dim() != 2 {
            return Err(Error::Config(format!("task space must be 2-D, got {}", self.task_space.dim())));
        }
        Bounds::new(self.task_space.lo.clone(), self.task_space.hi.clone())?;
        if !self.competence.dim_scales.is_empty() && self.competence.dim_scales.len() != 2 {
            return Err(Error::Config("dim_scales must match the task dimension".into()));
        }
        if self.reset_every == 0 {
            return Err(Error::Config("reset_every must be at least 1".into()));
        }
        if self.subgoals && self.environment == EnvironmentKind::Episodic {
            return Err(Error::Config("subgoals need an evolving context; disable them for episodic runs".into()));
        }
        if self.riac_candidates == 0 {
            return Err(Error::Config("riac_candidates must be positive".into()));
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("checkpoints must be strictly increasing".into()));
        }
        if self.test_db.seed == self.seed {
            return Err(Error::Config("the test database seed must differ from the run seed".into()));
        }
        World::from_config(self)?;
        Ok(())
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in.unwrap_or(2 * self.regions.g_max)
    }

    /// Configured checkpoints below the budget, then the budget itself.
    pub fn effective_checkpoints(&self) -> Vec<usize> {
        let mut c: Vec<usize> = self.checkpoints.iter().copied().filter(|&c| c > 0 && c < self.budget).collect();
        if self.budget > 0 {
            c.push(self.budget);
        }
        c
    }
}

#[derive(Debug, Clone)]
pub enum World {
    Arm(ArmEnv),
    Synergy(SynergyArm),
}

impl World {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(match cfg.environment {
            EnvironmentKind::MicroAction => World::Arm(ArmEnv::from_spec(&cfg.arm)?),
            EnvironmentKind::Episodic => World::Synergy(SynergyArm::from_spec(&cfg.arm)?),
        })
    }

    pub fn reach(&self) -> DiskReach {
        match self {
            World::Arm(a) => a.reach(),
            World::Synergy(s) => s.reach(),
        }
    }

    pub fn empty_memory(&self, params: &MemoryParams) -> SensorimotorMemory {
        match self {
            World::Arm(a) => SensorimotorMemory::evolving(a.n_dof(), a.task_dim(), params.clone()),
            World::Synergy(s) => SensorimotorMemory::fixed(s.param_dim(), s.task_dim(), params.clone()),
        }
    }
}

/// A self-generated goal.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalEvent {
    pub index: usize,
    /// Micro-actions spent before the goal was drawn.
    pub actions_before: usize,
    pub position: Point,
    pub mode: GoalMode,
}

/// One reach toward a goal or subgoal.
#[derive(Debug, Clone, PartialEq)]
pub struct AttemptRecord {
    pub goal_index: usize,
    pub origin: GoalOrigin,
    pub target: Point,
    pub start: Point,
    pub final_position: Point,
    pub gamma: f64,
    pub used: usize,
    pub terminated_by: Termination,
    pub actions_after: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationPoint {
    pub checkpoint: usize,
    /// Actions actually spent when the evaluation ran.
    pub actions: usize,
    pub mean_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionSnapshot {
    pub checkpoint: usize,
    pub actions: usize,
    pub leaves: Vec<LeafSnapshot>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunLog {
    pub name: String,
    pub strategy: Option<Strategy>,
    pub seed: u64,
    pub actions: usize,
    pub goals: Vec<GoalEvent>,
    pub attempts: Vec<AttemptRecord>,
    /// Action counts at which the context returned to rest.
    pub resets: Vec<usize>,
    /// `(actions, memory size)` samples.
    pub memory_sizes: Vec<(usize, usize)>,
    pub snapshots: Vec<RegionSnapshot>,
    pub evaluations: Vec<EvaluationPoint>,
    /// Records held by the task-space region tree at the end.
    pub tree_records: usize,
}

fn point_cells(p: &Point) -> Vec<String> {
    p.iter().map(|x| x.to_string()).collect()
}

impl RunLog {
    pub fn write_attempts_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "goal_index", "origin", "target_x", "target_y", "start_x", "start_y", "final_x", "final_y", "gamma",
            "mode", "used", "terminated_by", "actions_after",
        ])?;
        for a in &self.attempts {
            let mode = self.goals.get(a.goal_index).map(|g| g.mode.as_str()).unwrap_or("");
            let origin = match a.origin {
                GoalOrigin::SelfGenerated => "self_generated",
                GoalOrigin::Subgoal => "subgoal",
                GoalOrigin::EnRoute => "en_route",
            };
            let mut row = vec![a.goal_index.to_string(), origin.to_string()];
            row.extend(point_cells(&a.target));
            row.extend(point_cells(&a.start));
            row.extend(point_cells(&a.final_position));
            row.extend([
                a.gamma.to_string(),
                mode.to_string(),
                a.used.to_string(),
                a.terminated_by.as_str().to_string(),
                a.actions_after.to_string(),
            ]);
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_goals_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["index", "actions_before", "x", "y", "mode"])?;
        for g in &self.goals {
            let mut row = vec![g.index.to_string(), g.actions_before.to_string()];
            row.extend(point_cells(&g.position));
            row.push(g.mode.as_str().to_string());
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_regions_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["checkpoint", "actions", "leaf", "lo_x", "lo_y", "hi_x", "hi_y", "interest", "count"])?;
        for s in &self.snapshots {
            for (i, leaf) in s.leaves.iter().enumerate() {
                w.write_record([
                    s.checkpoint.to_string(),
                    s.actions.to_string(),
                    i.to_string(),
                    leaf.bounds.lo[0].to_string(),
                    leaf.bounds.lo[1].to_string(),
                    leaf.bounds.hi[0].to_string(),
                    leaf.bounds.hi[1].to_string(),
                    leaf.interest.to_string(),
                    leaf.count.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_memory_sizes_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["actions", "memory_size"])?;
        for (a, m) in &self.memory_sizes {
            w.write_record([a.to_string(), m.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_evaluations_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["checkpoint", "actions", "mean_error"])?;
        for e in &self.evaluations {
            w.write_record([e.checkpoint.to_string(), e.actions.to_string(), e.mean_error.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub log: RunLog,
    pub memory: SensorimotorMemory,
    /// Task-space tree of the goal-babbling strategies.
    pub tree: Option<RegionTree>,
}

const SIZE_SAMPLE_EVERY: usize = 100;

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    world: World,
    memory: SensorimotorMemory,
    tree: Option<RegionTree>,
    db: Option<&'a TestDatabase>,
    log: RunLog,
    pending: VecDeque<usize>,
    goal_rng: StreamRng,
    explore_rng: StreamRng,
}

impl<'a> Runner<'a> {
    fn remaining(&self) -> usize {
        self.cfg.budget - self.log.actions
    }

    /// Bookkeeping after every unit of work: memory-size samples and any
    /// checkpoints that were crossed.
    fn settle(&mut self) {
        let bucket = self.log.actions / SIZE_SAMPLE_EVERY;
        let last = self.log.memory_sizes.last().map(|(a, _)| a / SIZE_SAMPLE_EVERY);
        if last != Some(bucket) {
            self.log.memory_sizes.push((self.log.actions, self.memory.len()));
        }
        while let Some(&c) = self.pending.front() {
            if self.log.actions < c {
                break;
            }
            self.pending.pop_front();
            self.checkpoint(c);
        }
    }

    fn checkpoint(&mut self, checkpoint: usize) {
        let actions = self.log.actions;
        if let Some(db) = self.db {
            let mean_error = evaluate(&self.memory, &self.world, db, &self.cfg.reaching, &self.cfg.competence);
            self.log.evaluations.push(EvaluationPoint { checkpoint, actions, mean_error });
        }
        if let Some(tree) = &self.tree {
            self.log.snapshots.push(RegionSnapshot { checkpoint, actions, leaves: tree.leaf_snapshot() });
        }
    }

    fn next_goal(&mut self) -> (Point, GoalMode) {
        let tree = self.tree.as_ref().expect("goal babbling keeps a task-space tree");
        let burn_in = self.log.attempts.len() < self.cfg.burn_in();
        if self.cfg.strategy == Strategy::SaggRandom || burn_in {
            (self.cfg.task_space.sample(&mut self.goal_rng), GoalMode::Random)
        } else {
            tree.select_goal(&mut self.goal_rng)
        }
    }

    fn push_goal(&mut self, position: &Point, mode: GoalMode) -> usize {
        let index = self.log.goals.len();
        self.log.goals.push(GoalEvent { index, actions_before: self.log.actions, position: position.clone(), mode });
        index
    }

    fn sagg_evolving(&mut self) {
        let mut counter = 0u64;
        while self.remaining() > 0 {
            let World::Arm(env) = &mut self.world else { unreachable!() };
            if rest_reset_policy(counter, self.cfg.reset_every) {
                env.reset();
                self.log.resets.push(self.log.actions);
            }
            counter += 1;
            let (goal, mode) = self.next_goal();
            let goal_index = self.push_goal(&goal, mode);
            let World::Arm(env) = &mut self.world else { unreachable!() };
            let targets = if self.cfg.subgoals {
                make_subgoals(env.position(), &goal, self.cfg.subgoal_count)
            } else {
                vec![goal.clone()]
            };
            let last = targets.len() - 1;
            for (j, target) in targets.iter().enumerate() {
                if self.remaining() == 0 {
                    break;
                }
                let cap = self.remaining();
                let World::Arm(env) = &mut self.world else { unreachable!() };
                let tree = self.tree.as_mut().expect("task-space tree");
                let task = &self.cfg.task_space;
                let conservation = self.cfg.conservation;
                let out = reach_evolving(
                    env,
                    &mut self.memory,
                    target,
                    &self.cfg.reaching,
                    &self.cfg.competence,
                    cap,
                    &mut self.explore_rng,
                    &mut |y: &Point| {
                        if conservation && task.contains(y) {
                            tree.update(y, max_competence(), GoalOrigin::EnRoute);
                        }
                    },
                );
                let origin = if j == last { GoalOrigin::SelfGenerated } else { GoalOrigin::Subgoal };
                tree.update(target, out.gamma, origin);
                self.log.actions += out.used;
                self.log.attempts.push(AttemptRecord {
                    goal_index,
                    origin,
                    target: target.clone(),
                    start: out.start,
                    final_position: out.final_position,
                    gamma: out.gamma,
                    used: out.used,
                    terminated_by: out.terminated_by,
                    actions_after: self.log.actions,
                });
            }
            self.settle();
        }
    }

    fn sagg_episodic(&mut self) {
        while self.remaining() > 0 {
            let (goal, mode) = self.next_goal();
            let goal_index = self.push_goal(&goal, mode);
            let cap = self.remaining();
            let World::Synergy(env) = &self.world else { unreachable!() };
            let tree = self.tree.as_mut().expect("task-space tree");
            let task = &self.cfg.task_space;
            let conservation = self.cfg.conservation;
            let out = reach_fixed(
                env,
                &mut self.memory,
                &goal,
                &self.cfg.reaching,
                &self.cfg.competence,
                cap,
                &mut self.explore_rng,
                &mut |y: &Point| {
                    if conservation && task.contains(y) {
                        tree.update(y, max_competence(), GoalOrigin::EnRoute);
                    }
                },
            );
            tree.update(&goal, out.gamma, GoalOrigin::SelfGenerated);
            self.log.actions += out.used;
            self.log.attempts.push(AttemptRecord {
                goal_index,
                origin: GoalOrigin::SelfGenerated,
                target: goal,
                start: out.start,
                final_position: out.final_position,
                gamma: out.gamma,
                used: out.used,
                terminated_by: out.terminated_by,
                actions_after: self.log.actions,
            });
            self.settle();
        }
    }

    fn random_delta(&mut self, n: usize) -> Point {
        let a = self.cfg.reaching.explore_amplitude;
        Point::from_fn(n, |_, _| self.explore_rng.random_range(-a..=a))
    }

    fn store_step(&mut self, delta: &Point) -> crate::env::StepRecord {
        let World::Arm(env) = &mut self.world else { unreachable!() };
        let step = env.step(delta);
        self.memory
            .insert(SensorimotorEntry {
                context: step.alpha_before.clone(),
                action: Some(step.delta_alpha.clone()),
                effect: &step.y_after - &step.y_before,
            })
            .expect("environment dimensions match memory");
        self.log.actions += 1;
        step
    }

    fn store_rollout(&mut self, theta: Point) -> Point {
        let World::Synergy(env) = &self.world else { unreachable!() };
        let theta = theta.map(|t| t.clamp(0.0, 1.0));
        let y = env.rollout(&theta);
        self.memory
            .insert(SensorimotorEntry { context: theta, action: None, effect: y.clone() })
            .expect("environment dimensions match memory");
        self.log.actions += 1;
        y
    }

    /// Actions between rest resets for the actuator baselines: the reaching
    /// budget of the farthest task-space corner from the rest position.
    fn actuator_reset_period(&self) -> usize {
        let World::Arm(env) = &self.world else { unreachable!() };
        self.cfg.reaching.budget_for(farthest_corner(&self.cfg.task_space, &env.rest_position())).max(1)
    }

    fn maybe_reset(&mut self, period: usize) {
        if self.log.actions % period == 0 {
            let World::Arm(env) = &mut self.world else { unreachable!() };
            env.reset();
            self.log.resets.push(self.log.actions);
        }
    }

    fn actuator_random(&mut self) {
        match self.world {
            World::Arm(_) => {
                let period = self.actuator_reset_period();
                let n = self.memory.context_dim();
                while self.remaining() > 0 {
                    self.maybe_reset(period);
                    let delta = self.random_delta(n);
                    self.store_step(&delta);
                    self.settle();
                }
            }
            World::Synergy(_) => {
                let k = self.memory.context_dim();
                while self.remaining() > 0 {
                    let theta = Point::from_fn(k, |_, _| self.explore_rng.random::<f64>());
                    self.store_rollout(theta);
                    self.settle();
                }
            }
        }
    }

    fn actuator_riac(&mut self) -> Result<()> {
        let split_rng = stream(self.cfg.seed, Stream::RegionSplit);
        match self.world {
            World::Arm(_) => {
                let World::Arm(env) = &self.world else { unreachable!() };
                let n = env.n_dof();
                let a = self.cfg.reaching.explore_amplitude;
                let limits = env.geometry().joint_limits().to_vec();
                let lo: Vec<f64> = limits.iter().map(|l| l.0).chain(std::iter::repeat_n(-a, n)).collect();
                let hi: Vec<f64> = limits.iter().map(|l| l.1).chain(std::iter::repeat_n(a, n)).collect();
                let mut tree = RegionTree::new(Bounds::new(lo, hi)?, self.cfg.regions.clone(), split_rng)?;
                let period = self.actuator_reset_period();
                let v = self.cfg.reaching.velocity;
                let mut selections = 0;
                while self.remaining() > 0 {
                    self.maybe_reset(period);
                    let World::Arm(env) = &self.world else { unreachable!() };
                    let alpha = env.alpha().clone();
                    let candidates: Vec<Point> = (0..self.cfg.riac_candidates).map(|_| self.random_delta(n)).collect();
                    let burn_in = selections < self.cfg.burn_in();
                    let delta = choose_candidate(&tree, &alpha, candidates, burn_in, &mut self.goal_rng);
                    selections += 1;
                    let predicted =
                        self.memory.local_jacobian(&alpha, self.cfg.memory.jacobian_k).ok().map(|m| m.jacobian * &delta);
                    let step = self.store_step(&delta);
                    let observed = &step.y_after - &step.y_before;
                    let error = predicted.map(|p| (observed - p).norm() / v).unwrap_or(f64::INFINITY);
                    let key = Point::from_iterator(2 * n, step.alpha_before.iter().chain(step.delta_alpha.iter()).copied());
                    tree.update(&key, -error.min(1.0), GoalOrigin::SelfGenerated);
                    self.settle();
                }
            }
            World::Synergy(_) => {
                let k = self.memory.context_dim();
                let mut tree = RegionTree::new(Bounds::unit(k), self.cfg.regions.clone(), split_rng)?;
                let mut selections = 0;
                while self.remaining() > 0 {
                    let theta = if selections < self.cfg.burn_in() {
                        Bounds::unit(k).sample(&mut self.goal_rng)
                    } else {
                        tree.select_goal(&mut self.goal_rng).0
                    };
                    selections += 1;
                    let predicted = if self.memory.len() >= 2 {
                        self.memory.predict_effect(&theta, self.cfg.memory.jacobian_k).ok()
                    } else {
                        None
                    };
                    let y = self.store_rollout(theta.clone());
                    let error =
                        predicted.map(|p| self.cfg.competence.distance(&p, &y)).unwrap_or(f64::INFINITY);
                    tree.update(&theta, -error.min(1.0), GoalOrigin::SelfGenerated);
                    self.settle();
                }
            }
        }
        Ok(())
    }
}

/// Largest distance from `from` to a corner of `bounds`.
pub fn farthest_corner(bounds: &Bounds, from: &Point) -> f64 {
    (0..bounds.dim())
        .map(|j| (from[j] - bounds.lo[j]).abs().max((from[j] - bounds.hi[j]).abs()).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Picks one of `candidates` (joint increments applied at `alpha`): with
/// the tree's random-mode probability, or during burn-in, the first one;
/// otherwise a draw weighted by the selection probability of each
/// candidate's leaf.
pub fn choose_candidate<R: Rng + ?Sized>(
    tree: &RegionTree,
    alpha: &Point,
    mut candidates: Vec<Point>,
    burn_in: bool,
    rng: &mut R,
) -> Point {
    if burn_in || tree.sample_mode(rng) == GoalMode::Random {
        return candidates.swap_remove(0);
    }
    let min = tree.min_interest();
    let weights: Vec<f64> = candidates
        .iter()
        .map(|d| {
            let key = Point::from_iterator(alpha.len() + d.len(), alpha.iter().chain(d.iter()).copied());
            tree.interest(tree.leaf_of(&tree.root_bounds().clamp(&key))) - min
        })
        .collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return candidates.swap_remove(0);
    }
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return candidates.swap_remove(i);
        }
        u -= w;
    }
    let last = weights.iter().rposition(|w| *w > 0.0).unwrap_or(0);
    candidates.swap_remove(last)
}

/// Runs one experiment, evaluating on the database described by the config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunResult> {
    if cfg.evaluate && cfg.budget > 0 {
        let world = World::from_config(cfg)?;
        let db = make_test_db(&world.reach(), &cfg.task_space, &cfg.test_db)?;
        run_experiment_with_db(cfg, Some(&db))
    } else {
        run_experiment_with_db(cfg, None)
    }
}

/// Runs one experiment, evaluating on `db` at every checkpoint when given.
pub fn run_experiment_with_db(cfg: &ExperimentConfig, db: Option<&TestDatabase>) -> Result<RunResult> {
    cfg.validate()?;
    let world = World::from_config(cfg)?;
    let memory = world.empty_memory(&cfg.memory);
    let tree = if cfg.strategy.is_goal_babbling() {
        Some(RegionTree::new(cfg.task_space.clone(), cfg.regions.clone(), stream(cfg.seed, Stream::RegionSplit))?)
    } else {
        None
    };
    let mut runner = Runner {
        cfg,
        world,
        memory,
        tree,
        db: if cfg.evaluate { db } else { None },
        log: RunLog { name: cfg.name.clone(), strategy: Some(cfg.strategy), seed: cfg.seed, ..Default::default() },
        pending: cfg.effective_checkpoints().into(),
        goal_rng: stream(cfg.seed, Stream::GoalSelection),
        explore_rng: stream(cfg.seed, Stream::Exploration),
    };
    if cfg.budget > 0 {
        if let Some(tree) = &runner.tree {
            runner.log.snapshots.push(RegionSnapshot { checkpoint: 0, actions: 0, leaves: tree.leaf_snapshot() });
        }
        runner.log.memory_sizes.push((0, 0));
    }
    match (cfg.strategy, cfg.environment) {
        (Strategy::SaggRiac | Strategy::SaggRandom, EnvironmentKind::MicroAction) => runner.sagg_evolving(),
        (Strategy::SaggRiac | Strategy::SaggRandom, EnvironmentKind::Episodic) => runner.sagg_episodic(),
        (Strategy::ActuatorRandom, _) => runner.actuator_random(),
        (Strategy::ActuatorRiac, _) => runner.actuator_riac()?,
    }
    runner.log.tree_records = runner.tree.as_ref().map_or(0, |t| t.total_records());
    Ok(RunResult { log: runner.log, memory: runner.memory, tree: runner.tree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::competence::gamma;
    use crate::space::point;

    pub(crate) fn small_arm(strategy: Strategy, budget: usize) -> ExperimentConfig {
        ExperimentConfig {
            name: "test".into(),
            strategy,
            environment: EnvironmentKind::MicroAction,
            arm: ArmSpec::new(3, 30.0),
            task_space: Bounds::new(vec![0.0, -60.0], vec![60.0, 60.0]).unwrap(),
            budget,
            seed: 7,
            regions: RegionParams { g_max: 20, ..Default::default() },
            reaching: ReachingParams::default(),
            competence: CompetenceConfig::default(),
            memory: MemoryParams::default(),
            subgoals: true,
            subgoal_count: 3,
            conservation: true,
            reset_every: 1,
            burn_in: None,
            riac_candidates: 10,
            checkpoints: vec![200, 500],
            test_db: TestDbSpec { seed: 99, count: 20 },
            evaluate: true,
        }
    }

    #[test]
    fn zero_budget_gives_an_empty_log() {
        let r = run_experiment(&small_arm(Strategy::SaggRiac, 0)).unwrap();
        assert!(r.log.attempts.is_empty() && r.log.goals.is_empty() && r.log.evaluations.is_empty());
        assert_eq!(r.log.actions, 0);
        assert_eq!(r.memory.len(), 0);
    }

    #[test]
    fn sagg_run_is_consistent() {
        let cfg = ExperimentConfig { burn_in: Some(10), ..small_arm(Strategy::SaggRiac, 1500) };
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(r.log.actions, 1500);
        assert_eq!(r.memory.len(), 1500);
        let checkpoints: Vec<usize> = r.log.evaluations.iter().map(|e| e.checkpoint).collect();
        assert_eq!(checkpoints, vec![200, 500, 1500]);
        assert_eq!(r.log.evaluations.last().unwrap().actions, 1500);
        for a in &r.log.attempts {
            assert_eq!(a.gamma, gamma(&a.target, &a.final_position, &a.start, &cfg.competence));
        }
        assert!(r.log.tree_records > r.log.attempts.len());
        for g in &r.log.goals {
            let attempts_before = r.log.attempts.iter().filter(|a| a.goal_index < g.index).count();
            if attempts_before < cfg.burn_in() {
                assert_eq!(g.mode, GoalMode::Random);
            }
        }
        assert!(r.log.goals.iter().any(|g| g.mode != GoalMode::Random));
        let counter: Vec<usize> = r.log.attempts.iter().map(|a| a.actions_after).collect();
        assert!(counter.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn sagg_random_only_draws_random_goals() {
        let r = run_experiment(&small_arm(Strategy::SaggRandom, 800)).unwrap();
        assert!(!r.log.goals.is_empty());
        assert!(r.log.goals.iter().all(|g| g.mode == GoalMode::Random));
        assert!(r.tree.unwrap().updates() > 0);
    }

    #[test]
    fn actuator_random_resets_periodically() {
        let cfg = small_arm(Strategy::ActuatorRandom, 700);
        let r = run_experiment(&cfg).unwrap();
        let world = World::from_config(&cfg).unwrap();
        let World::Arm(env) = world else { panic!() };
        let period = cfg.reaching.budget_for(farthest_corner(&cfg.task_space, &env.rest_position()));
        let expected: Vec<usize> = (0..700).step_by(period).collect();
        assert_eq!(r.log.resets, expected);
        assert!(r.log.goals.is_empty() && r.tree.is_none());
        assert_eq!(r.memory.len(), 700);
    }

    #[test]
    fn runs_replay_identically() {
        for strategy in [Strategy::SaggRiac, Strategy::ActuatorRiac] {
            let cfg = small_arm(strategy, 600);
            let (a, b) = (run_experiment(&cfg).unwrap(), run_experiment(&cfg).unwrap());
            assert_eq!(a.log, b.log);
            assert_eq!(a.memory.entries(), b.memory.entries());
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = small_arm(Strategy::SaggRiac, 10);
        cfg.test_db.seed = cfg.seed;
        assert!(cfg.validate().is_err());
        let mut cfg = small_arm(Strategy::SaggRiac, 10);
        cfg.environment = EnvironmentKind::Episodic;
        assert!(cfg.validate().is_err());
        let mut cfg = small_arm(Strategy::SaggRiac, 10);
        cfg.checkpoints = vec![5, 5];
        assert!(cfg.validate().is_err());
        let text = serde_json::to_string(&small_arm(Strategy::SaggRiac, 10)).unwrap();
        let bad = text.replacen("\"budget\"", "\"budgte\"", 1);
        assert!(ExperimentConfig::from_json(&bad).is_err());
        assert!(ExperimentConfig::from_json(&text).is_ok());
    }

    #[test]
    fn episodic_strategies_run() {
        for strategy in [Strategy::SaggRiac, Strategy::ActuatorRandom, Strategy::ActuatorRiac] {
            let mut cfg = small_arm(strategy, 300);
            cfg.environment = EnvironmentKind::Episodic;
            cfg.subgoals = false;
            cfg.arm.rest = Some(crate::env::RestPose::Constant(0.5));
            cfg.competence.dim_scales = cfg.task_space.unit_scales();
            let r = run_experiment(&cfg).unwrap();
            assert_eq!(r.memory.len(), 300);
            assert_eq!(r.log.evaluations.len(), 2);
        }
    }

    #[test]
    fn riac_candidates_follow_interest() {
        // a landscape whose prediction error keeps dropping only where the
        // first increment component is positive
        let bounds = Bounds::new(vec![-1.0, -1.0, -0.05, -0.05], vec![1.0, 1.0, 0.05, 0.05]).unwrap();
        let params = RegionParams { g_max: 30, ..Default::default() };
        let mut tree = RegionTree::new(bounds.clone(), params, stream(1, Stream::RegionSplit)).unwrap();
        let mut rng = stream(2, Stream::GoalSelection);
        let alpha = point(&[0.2, -0.3]);
        let mut learning = 0usize;
        for _ in 0..3000 {
            let p = bounds.sample(&mut rng);
            let error = if p[2] > 0.0 {
                learning += 1;
                (-(learning as f64) / 300.0).exp() + 0.3 * rng.random::<f64>()
            } else {
                0.5 + 0.01 * rng.random::<f64>()
            };
            tree.update(&p, -error.min(1.0), GoalOrigin::SelfGenerated);
        }
        let mut positive = 0;
        for _ in 0..2000 {
            let cands: Vec<Point> =
                (0..20).map(|_| Point::from_fn(2, |_, _| rng.random_range(-0.05..=0.05))).collect();
            if choose_candidate(&tree, &alpha, cands, false, &mut rng)[0] > 0.0 {
                positive += 1;
            }
        }
        assert!(positive as f64 / 2000.0 >= 0.6, "positive share {}", positive as f64 / 2000.0);
    }
}
