//! Low-level goal-directed exploration.
//!
//! [`reach_evolving`] drives a micro-action environment toward a goal with
//! pseudo-inverse steps through locally fitted Jacobians, switching to short
//! bursts of random micro-actions whenever the local model mispredicts or
//! lacks support. [`reach_fixed`] handles resettable environments: one
//! rollout from the local inverse model, then a stochastic hill-climb around
//! the best parameters known for the goal.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::competence::{gamma, CompetenceConfig};
use crate::env::{EpisodicEnv, MicroActionEnv};
use crate::memory::{SensorimotorEntry, SensorimotorMemory};
use crate::space::Point;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReachingParams {
    /// Commanded task-space displacement per micro-action.
    #[serde(default = "d_velocity")]
    pub velocity: f64,
    /// Micro-action budget per goal, as a multiple of `D(start, goal) / v`.
    #[serde(default = "d_factor")]
    pub factor: f64,
    /// Random actions (or rollouts) per exploration phase.
    #[serde(default = "d_q")]
    pub explore_q: usize,
    /// Consecutive unproductive exploration phases before giving up; `None`
    /// disables the blocking criterion.
    #[serde(default)]
    pub blocking_w: Option<usize>,
    /// Prediction error that triggers exploration; defaults to half of `v`.
    #[serde(default)]
    pub eps_max: Option<f64>,
    /// Half-width of the per-joint uniform exploration draw, in radians.
    #[serde(default = "d_amplitude")]
    pub explore_amplitude: f64,
    /// Fixed-context perturbation scale.
    #[serde(default = "d_lambda")]
    pub lambda: f64,
    /// Candidate neighbour sets of the fixed-context inverse.
    #[serde(default = "d_inverse_l")]
    pub inverse_l: usize,
    /// Size of each fixed-context neighbour set.
    #[serde(default = "d_inverse_m")]
    pub inverse_m: usize,
}

fn d_velocity() -> f64 {
    2.0
}
fn d_factor() -> f64 {
    1.5
}
fn d_q() -> usize {
    20
}
fn d_amplitude() -> f64 {
    0.05
}
fn d_lambda() -> f64 {
    1.0
}
fn d_inverse_l() -> usize {
    5
}
fn d_inverse_m() -> usize {
    16
}

impl Default for ReachingParams {
    fn default() -> Self {
        ReachingParams {
            velocity: d_velocity(),
            factor: d_factor(),
            explore_q: d_q(),
            blocking_w: None,
            eps_max: None,
            explore_amplitude: d_amplitude(),
            lambda: d_lambda(),
            inverse_l: d_inverse_l(),
            inverse_m: d_inverse_m(),
        }
    }
}

impl ReachingParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.velocity > 0.0) {
            return fail(format!("velocity must be positive, got {}", self.velocity));
        }
        if !(self.factor > 1.0) {
            return fail(format!("factor must exceed 1, got {}", self.factor));
        }
        if self.explore_q == 0 {
            return fail("explore_q must be at least 1".into());
        }
        if let Some(w) = self.blocking_w {
            if w < 2 {
                return fail(format!("blocking_w must be at least 2, got {w}"));
            }
        }
        if let Some(e) = self.eps_max {
            if !(e > 0.0) {
                return fail(format!("eps_max must be positive, got {e}"));
            }
        }
        if !(self.explore_amplitude > 0.0) {
            return fail("explore_amplitude must be positive".into());
        }
        if !(self.lambda >= 0.0) {
            return fail("lambda must be non-negative".into());
        }
        if self.inverse_l == 0 || self.inverse_m == 0 {
            return fail("inverse_l and inverse_m must be positive".into());
        }
        Ok(())
    }

    pub fn eps_max(&self) -> f64 {
        self.eps_max.unwrap_or(0.5 * self.velocity)
    }

    /// `ceil(factor * distance / v)`.
    pub fn budget_for(&self, distance: f64) -> usize {
        (self.factor * distance / self.velocity).ceil() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Reached,
    Timeout,
    Blocked,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Reached => "reached",
            Termination::Timeout => "timeout",
            Termination::Blocked => "blocked",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReachOutcome {
    pub goal: Point,
    pub start: Point,
    pub final_position: Point,
    pub gamma: f64,
    /// Micro-actions or rollouts performed, exploration included.
    pub used: usize,
    pub exploration_phases: usize,
    pub terminated_by: Termination,
}

/// Straight-line subgoals `start + (i/l)(goal - start)` for `i = 1..=l`; the
/// last one is the goal itself. `l = 0` behaves like `l = 1`.
pub fn make_subgoals(start: &Point, goal: &Point, l: usize) -> Vec<Point> {
    let l = l.max(1);
    (1..l).map(|i| start + (goal - start) * (i as f64 / l as f64)).chain(std::iter::once(goal.clone())).collect()
}

/// Whether to return to the rest pose before attempt number `counter`.
pub fn rest_reset_policy(counter: u64, r: u64) -> bool {
    counter % r.max(1) == 0
}

/// Tracks the best distance to the goal and the run of exploration phases
/// after which it did not improve.
struct Blocking {
    best: f64,
    improved: bool,
    phase_open: bool,
    stalled: usize,
}

const PROGRESS_TOL: f64 = 1e-6;

impl Blocking {
    fn new(initial: f64) -> Self {
        Blocking { best: initial, improved: false, phase_open: false, stalled: 0 }
    }

    fn observe(&mut self, d: f64) {
        if d < self.best - PROGRESS_TOL {
            self.best = d;
            self.improved = true;
        }
    }

    /// Registers an exploration trigger, closing the previous phase. True
    /// once the last `w` phases all went without progress.
    fn trigger(&mut self, w: usize) -> bool {
        if self.phase_open {
            self.stalled = if self.improved { 0 } else { self.stalled + 1 };
        }
        self.phase_open = true;
        self.improved = false;
        self.stalled >= w
    }
}

/// Commanded displacement `v` toward the goal (capped at the remaining
/// distance) and the joint step the local inverse model maps it to.
fn pseudo_inverse_step(
    memory: &SensorimotorMemory,
    alpha: &Point,
    position: &Point,
    goal: &Point,
    v: f64,
) -> Option<(Point, Point)> {
    let to_goal = goal - position;
    let d = to_goal.norm();
    let dy = if d > 0.0 { to_goal * (v.min(d) / d) } else { to_goal };
    let model = memory.local_jacobian(alpha, memory.params().jacobian_k).ok()?;
    Some((&model.pseudo_inverse * &dy, dy))
}

/// Reaches for `goal` from the environment's current state, learning along
/// the way. Every micro-action is inserted into `memory` and its resulting
/// position passed to `observe`. At most `cap` micro-actions are spent.
pub fn reach_evolving<E, R>(
    env: &mut E,
    memory: &mut SensorimotorMemory,
    goal: &Point,
    params: &ReachingParams,
    competence: &CompetenceConfig,
    cap: usize,
    rng: &mut R,
    observe: &mut dyn FnMut(&Point),
) -> ReachOutcome
where
    E: MicroActionEnv + ?Sized,
    R: Rng + ?Sized,
{
    let start = env.position().clone();
    let budget = params.budget_for(competence.distance(&start, goal)).min(cap);
    let mut blocking = Blocking::new(competence.distance(&start, goal));
    let mut used = 0;
    let mut phases = 0;
    let mut record = |env: &mut E, memory: &mut SensorimotorMemory, delta: &Point, used: &mut usize| {
        let step = env.step(delta);
        let effect = &step.y_after - &step.y_before;
        memory
            .insert(SensorimotorEntry { context: step.alpha_before.clone(), action: Some(step.delta_alpha.clone()), effect })
            .expect("environment dimensions match memory");
        observe(&step.y_after);
        *used += 1;
        step
    };

    let terminated_by = loop {
        let y = env.position().clone();
        if gamma(goal, &y, &start, competence) == 0.0 {
            break Termination::Reached;
        }
        if used >= budget {
            break Termination::Timeout;
        }
        let mispredicted = match pseudo_inverse_step(memory, env.alpha(), &y, goal, params.velocity) {
            Some((delta, commanded)) => {
                let step = record(env, memory, &delta, &mut used);
                blocking.observe(competence.distance(&step.y_after, goal));
                (&step.y_after - &step.y_before - commanded).norm() > params.eps_max()
            }
            None => true,
        };
        if !mispredicted {
            continue;
        }
        if let Some(w) = params.blocking_w {
            if blocking.trigger(w) {
                break Termination::Blocked;
            }
        }
        phases += 1;
        let n = env.n_dof();
        let a = params.explore_amplitude;
        for _ in 0..params.explore_q {
            if used >= budget {
                break;
            }
            let delta = Point::from_fn(n, |_, _| rng.random_range(-a..=a));
            let step = record(env, memory, &delta, &mut used);
            blocking.observe(competence.distance(&step.y_after, goal));
        }
    };
    let final_position = env.position().clone();
    ReachOutcome {
        gamma: gamma(goal, &final_position, &start, competence),
        goal: goal.clone(),
        start,
        final_position,
        used,
        exploration_phases: phases,
        terminated_by,
    }
}

/// Pure-exploitation reaching: the same controller with empty exploration
/// phases and no learning. Stops at the second mispredicted or unsupported
/// step in a row that made no progress.
pub fn reach_exploit<E>(
    env: &mut E,
    memory: &SensorimotorMemory,
    goal: &Point,
    params: &ReachingParams,
    competence: &CompetenceConfig,
) -> ReachOutcome
where
    E: MicroActionEnv + ?Sized,
{
    let start = env.position().clone();
    let budget = params.budget_for(competence.distance(&start, goal));
    let mut blocking = Blocking::new(competence.distance(&start, goal));
    let mut used = 0;
    let terminated_by = loop {
        let y = env.position().clone();
        if gamma(goal, &y, &start, competence) == 0.0 {
            break Termination::Reached;
        }
        if used >= budget {
            break Termination::Timeout;
        }
        let mispredicted = match pseudo_inverse_step(memory, env.alpha(), &y, goal, params.velocity) {
            Some((delta, commanded)) => {
                let step = env.step(&delta);
                used += 1;
                blocking.observe(competence.distance(&step.y_after, goal));
                (&step.y_after - &step.y_before - commanded).norm() > params.eps_max()
            }
            None => true,
        };
        if mispredicted && blocking.trigger(1) {
            break Termination::Blocked;
        }
    };
    let final_position = env.position().clone();
    ReachOutcome {
        gamma: gamma(goal, &final_position, &start, competence),
        goal: goal.clone(),
        start,
        final_position,
        used,
        exploration_phases: 0,
        terminated_by,
    }
}

fn rollout_and_store<E: EpisodicEnv + ?Sized>(
    env: &E,
    memory: &mut SensorimotorMemory,
    theta: Point,
    observe: &mut dyn FnMut(&Point),
) -> (Point, Point) {
    let theta = theta.map(|t| t.clamp(0.0, 1.0));
    let y = env.rollout(&theta);
    memory
        .insert(SensorimotorEntry { context: theta.clone(), action: None, effect: y.clone() })
        .expect("environment dimensions match memory");
    observe(&y);
    (theta, y)
}

/// Parameters the local inverse model proposes for `goal`; a uniform draw
/// when memory is empty.
pub fn propose_params<R: Rng + ?Sized>(
    memory: &SensorimotorMemory,
    goal: &Point,
    params: &ReachingParams,
    rng: &mut R,
) -> Point {
    match memory.local_inverse_fixed_context(goal, params.inverse_l, params.inverse_m) {
        Ok(est) => est.params,
        Err(_) => Point::from_fn(memory.context_dim(), |_, _| rng.random::<f64>()),
    }
}

/// One goal attempt in a resettable environment. Rolls out the inverse
/// model's proposal; when that lands no closer than the best stored effect,
/// hill-climbs for `explore_q` rollouts from the best known parameters with
/// noise proportional to the remaining (scaled) distance. At most `cap`
/// rollouts are spent.
pub fn reach_fixed<E, R>(
    env: &E,
    memory: &mut SensorimotorMemory,
    goal: &Point,
    params: &ReachingParams,
    competence: &CompetenceConfig,
    cap: usize,
    rng: &mut R,
    observe: &mut dyn FnMut(&Point),
) -> ReachOutcome
where
    E: EpisodicEnv + ?Sized,
    R: Rng + ?Sized,
{
    let start = env.rest_effect();
    let outcome = |final_position: Point, used, phases, terminated_by| ReachOutcome {
        gamma: gamma(goal, &final_position, &start, competence),
        goal: goal.clone(),
        start: start.clone(),
        final_position,
        used,
        exploration_phases: phases,
        terminated_by,
    };
    if cap == 0 {
        return outcome(start.clone(), 0, 0, Termination::Timeout);
    }
    let closest = memory.nearest(goal, 1).ok().map(|n| {
        let e = memory.entry(n[0].0);
        (e.context.clone(), e.effect.clone())
    });
    let proposal = propose_params(memory, goal, params, rng);
    let (theta_t, y_t) = rollout_and_store(env, memory, proposal, observe);
    let gamma_t = gamma(goal, &y_t, &start, competence);
    if gamma_t == 0.0 {
        return outcome(y_t, 1, 0, Termination::Reached);
    }
    let inefficient = match &closest {
        Some((_, y_c)) => competence.distance(goal, &y_t) >= competence.distance(goal, y_c),
        None => true,
    };
    if !inefficient || cap == 1 {
        return outcome(y_t, 1, 0, Termination::Timeout);
    }

    // hill-climb from the closest known effect, keeping the attempt's best
    let (mut theta_k, mut y_k) = match closest {
        Some(c) => c,
        None => (theta_t.clone(), y_t.clone()),
    };
    let mut gamma_k = gamma(goal, &y_k, &start, competence);
    let mut best_here = (y_t, gamma_t);
    let mut used = 1;
    let n = memory.context_dim();
    let mut terminated_by = Termination::Timeout;
    for _ in 0..params.explore_q.min(cap - 1) {
        let scale = params.lambda * competence.distance(goal, &y_k);
        let theta = Point::from_fn(n, |i, _| theta_k[i] + scale * rng.random_range(-1.0..=1.0));
        let (theta_i, y_i) = rollout_and_store(env, memory, theta, observe);
        used += 1;
        let gamma_i = gamma(goal, &y_i, &start, competence);
        if gamma_i > best_here.1 {
            best_here = (y_i.clone(), gamma_i);
        }
        if gamma_i > gamma_k
            || (gamma_i == gamma_k && competence.distance(goal, &y_i) < competence.distance(goal, &y_k))
        {
            theta_k = theta_i;
            y_k = y_i;
            gamma_k = gamma_i;
        }
        if gamma_i == 0.0 {
            terminated_by = Termination::Reached;
            break;
        }
    }
    outcome(best_here.0, used, 1, terminated_by)
}

/// Exploitation counterpart of [`reach_fixed`]: one rollout of the inverse
/// model's proposal, the rest pose when memory is empty.
pub fn reach_fixed_exploit<E: EpisodicEnv + ?Sized>(
    env: &E,
    memory: &SensorimotorMemory,
    goal: &Point,
    params: &ReachingParams,
) -> Point {
    match memory.local_inverse_fixed_context(goal, params.inverse_l, params.inverse_m) {
        Ok(est) => env.rollout(&est.params),
        Err(_) => env.rest_effect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{ArmEnv, ArmGeometry, DEFAULT_MAX_STEP};
    use crate::memory::MemoryParams;
    use crate::rng::{stream, Stream};
    use crate::space::point;
    use nalgebra::DMatrix;

    #[test]
    fn subgoal_examples() {
        let s = make_subgoals(&point(&[0.0, 0.0]), &point(&[10.0, 0.0]), 5);
        let xs: Vec<f64> = s.iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![2.0, 4.0, 6.0, 8.0, 10.0]);
        assert_eq!(make_subgoals(&point(&[1.0, 1.0]), &point(&[3.0, 4.0]), 1), vec![point(&[3.0, 4.0])]);
        let (a, b) = (point(&[-3.0, 2.0]), point(&[7.0, -5.0]));
        for p in make_subgoals(&a, &b, 7) {
            let (u, w) = (&b - &a, &p - &a);
            assert!((u[0] * w[1] - u[1] * w[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn reset_policy() {
        assert!((0..5).all(|c| rest_reset_policy(c, 1)));
        let r2: Vec<bool> = (0..4).map(|c| rest_reset_policy(c, 2)).collect();
        assert_eq!(r2, vec![true, false, true, false]);
        let r3: Vec<u64> = (0..6).filter(|&c| rest_reset_policy(c, 3)).collect();
        assert_eq!(r3, vec![0, 3]);
    }

    fn two_dof() -> ArmEnv {
        let g = ArmGeometry::uniform(2, 50.0, std::f64::consts::PI).unwrap();
        ArmEnv::new(g, point(&[0.3, 0.6]), DEFAULT_MAX_STEP).unwrap()
    }

    fn seeded_memory(env: &mut ArmEnv, n: usize, rng: &mut impl Rng) -> SensorimotorMemory {
        let mut memory = SensorimotorMemory::evolving(2, 2, MemoryParams::default());
        for _ in 0..n {
            let delta = Point::from_fn(2, |_, _| rng.random_range(-0.2..=0.2));
            let s = env.step(&delta);
            memory
                .insert(SensorimotorEntry {
                    context: s.alpha_before,
                    action: Some(s.delta_alpha),
                    effect: &s.y_after - &s.y_before,
                })
                .unwrap();
        }
        env.reset();
        memory
    }

    #[test]
    fn goal_at_current_position_is_reached_immediately() {
        let mut env = two_dof();
        let mut memory = SensorimotorMemory::evolving(2, 2, MemoryParams::default());
        let goal = env.position().clone();
        let mut rng = stream(0, Stream::Exploration);
        let out = reach_evolving(
            &mut env,
            &mut memory,
            &goal,
            &ReachingParams::default(),
            &CompetenceConfig::default(),
            usize::MAX,
            &mut rng,
            &mut |_| {},
        );
        assert_eq!(out.terminated_by, Termination::Reached);
        assert_eq!((out.used, out.gamma), (0, 0.0));
    }

    #[test]
    fn reaches_inner_goals_with_seeded_memory() {
        let mut rng = stream(11, Stream::Exploration);
        let mut env = two_dof();
        let mut memory = seeded_memory(&mut env, 500, &mut rng);
        let params = ReachingParams::default();
        let cfg = CompetenceConfig::default();
        let mut reached = 0;
        for _ in 0..50 {
            env.reset();
            // 0.3 radius away from the start, inside the disk
            let goal = loop {
                let phi = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
                let g = env.position() + point(&[15.0 * phi.cos(), 15.0 * phi.sin()]);
                if g.norm() < 47.5 {
                    break g;
                }
            };
            let before = memory.len();
            let out = reach_evolving(&mut env, &mut memory, &goal, &params, &cfg, usize::MAX, &mut rng, &mut |_| {});
            assert_eq!(memory.len() - before, out.used);
            assert!(out.used <= params.budget_for(cfg.distance(&out.start, &goal)));
            if out.terminated_by == Termination::Reached {
                reached += 1;
            }
        }
        assert!(reached >= 45, "reached {reached}/50");
    }

    #[test]
    fn unreachable_goal_fails() {
        let mut rng = stream(2, Stream::Exploration);
        let mut env = two_dof();
        let mut memory = seeded_memory(&mut env, 200, &mut rng);
        let params = ReachingParams { blocking_w: Some(3), explore_q: 5, ..Default::default() };
        let cfg = CompetenceConfig::default();
        let goal = point(&[120.0, 40.0]);
        let out = reach_evolving(&mut env, &mut memory, &goal, &params, &cfg, usize::MAX, &mut rng, &mut |_| {});
        assert!(matches!(out.terminated_by, Termination::Timeout | Termination::Blocked));
        assert!(out.gamma < cfg.eps_sim);
        if out.terminated_by == Termination::Blocked {
            assert!(out.exploration_phases >= 3);
        }
    }

    #[test]
    fn exploitation_leaves_memory_alone_and_stays_put_when_empty() {
        let mut env = two_dof();
        let memory = SensorimotorMemory::evolving(2, 2, MemoryParams::default());
        let goal = point(&[10.0, 10.0]);
        let out = reach_exploit(&mut env, &memory, &goal, &ReachingParams::default(), &CompetenceConfig::default());
        assert_eq!(out.used, 0);
        assert_eq!(out.final_position, env.rest_position());
        assert_eq!(out.terminated_by, Termination::Blocked);
    }

    /// `y = A θ` on the unit cube.
    struct LinearMap(DMatrix<f64>);

    impl EpisodicEnv for LinearMap {
        fn param_dim(&self) -> usize {
            self.0.ncols()
        }
        fn task_dim(&self) -> usize {
            self.0.nrows()
        }
        fn rollout(&self, theta: &Point) -> Point {
            &self.0 * theta.map(|t| t.clamp(0.0, 1.0))
        }
        fn rest_params(&self) -> Point {
            Point::from_element(self.0.ncols(), 0.5)
        }
    }

    fn linear_env() -> LinearMap {
        LinearMap(DMatrix::from_row_slice(2, 4, &[1.0, 0.5, -0.3, 0.2, 0.1, -0.4, 0.8, 0.6]))
    }

    fn scaled_cfg() -> CompetenceConfig {
        CompetenceConfig { dim_scales: vec![0.5, 0.5], ..Default::default() }
    }

    #[test]
    fn fixed_reach_on_linear_map() {
        let env = linear_env();
        let params = ReachingParams::default();
        let cfg = scaled_cfg();
        let mut rng = stream(4, Stream::Exploration);
        let mut hits = 0;
        for trial in 0..50 {
            let mut memory = SensorimotorMemory::fixed(4, 2, MemoryParams::default());
            for _ in 0..200 {
                let theta = Point::from_fn(4, |_, _| rng.random::<f64>());
                rollout_and_store(&env, &mut memory, theta, &mut |_| {});
            }
            let goal = env.rollout(&Point::from_fn(4, |_, _| rng.random_range(0.2..0.8)));
            let mut observed = Vec::new();
            let before = memory.len();
            let out =
                reach_fixed(&env, &mut memory, &goal, &params, &cfg, usize::MAX, &mut rng, &mut |y| observed.push(y.clone()));
            assert_eq!(memory.len() - before, out.used, "trial {trial}");
            assert_eq!(observed.len(), out.used);
            for y in &observed {
                assert!(gamma(&goal, y, &out.start, &cfg) <= out.gamma);
            }
            // task box of the map is about 2 x 2 wide
            if (&out.final_position - &goal).norm() < 0.05 * 8f64.sqrt() {
                hits += 1;
            }
        }
        assert!(hits >= 45, "hits {hits}/50");
    }

    #[test]
    fn zero_lambda_replays_best_params() {
        let env = linear_env();
        let params = ReachingParams { lambda: 0.0, explore_q: 6, ..Default::default() };
        let cfg = scaled_cfg();
        let mut memory = SensorimotorMemory::fixed(4, 2, MemoryParams::default());
        let theta_c = point(&[0.9, 0.1, 0.9, 0.1]);
        rollout_and_store(&env, &mut memory, theta_c.clone(), &mut |_| {});
        let y_c = env.rollout(&theta_c);
        // a goal the single-entry inverse cannot beat
        let goal = &y_c + point(&[0.3, -0.2]);
        let mut rng = stream(5, Stream::Exploration);
        let mut observed = Vec::new();
        let out = reach_fixed(&env, &mut memory, &goal, &params, &cfg, usize::MAX, &mut rng, &mut |y| {
            observed.push(y.clone())
        });
        assert_eq!(out.used, 7);
        assert!(observed[1..].iter().all(|y| *y == y_c));
    }

    #[test]
    fn stored_goal_is_reached_without_exploration() {
        let env = linear_env();
        let mut memory = SensorimotorMemory::fixed(4, 2, MemoryParams::default());
        let theta = point(&[0.3, 0.6, 0.2, 0.7]);
        rollout_and_store(&env, &mut memory, theta.clone(), &mut |_| {});
        let goal = env.rollout(&theta);
        let mut rng = stream(6, Stream::Exploration);
        let out = reach_fixed(&env, &mut memory, &goal, &ReachingParams::default(), &scaled_cfg(), 100, &mut rng, &mut |_| {});
        assert_eq!(out.terminated_by, Termination::Reached);
        assert_eq!((out.used, out.exploration_phases), (1, 0));
    }

    #[test]
    fn params_validation() {
        assert!(ReachingParams::default().validate().is_ok());
        assert!(ReachingParams { factor: 1.0, ..Default::default() }.validate().is_err());
        assert!(ReachingParams { blocking_w: Some(1), ..Default::default() }.validate().is_err());
        assert!(ReachingParams { explore_q: 0, ..Default::default() }.validate().is_err());
        assert_eq!(ReachingParams::default().eps_max(), 1.0);
        assert_eq!(ReachingParams::default().budget_for(10.0), 8);
    }
}
