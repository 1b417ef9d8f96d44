//! Simulated environments.
//!
//! [`ArmEnv`] is a planar n-link arm moved by small joint increments: the
//! context (joint angles) carries over from one micro-action to the next.
//! [`SynergyArm`] is the episodic counterpart: a parameter vector in the unit
//! cube is mapped to a joint pose and the resulting end-effector position is
//! returned, with the context reset before every rollout.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::space::{point, Bounds, Point};
use crate::{Error, Result};

pub const DEFAULT_REST_ANGLE: f64 = 0.1;
pub const DEFAULT_MAX_STEP: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct ArmGeometry {
    link_lengths: Vec<f64>,
    joint_limits: Vec<(f64, f64)>,
}

impl ArmGeometry {
    pub fn new(link_lengths: Vec<f64>, joint_limits: Vec<(f64, f64)>) -> Result<Self> {
        if link_lengths.is_empty() {
            return Err(Error::Config("arm needs at least one link".into()));
        }
        if link_lengths.len() != joint_limits.len() {
            return Err(Error::DimensionMismatch { expected: link_lengths.len(), actual: joint_limits.len() });
        }
        if link_lengths.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(Error::Config(format!("link lengths must be positive: {link_lengths:?}")));
        }
        if joint_limits.iter().any(|(lo, hi)| !(lo < hi)) {
            return Err(Error::Config(format!("empty joint interval in {joint_limits:?}")));
        }
        Ok(ArmGeometry { link_lengths, joint_limits })
    }

    /// `n` links of equal length summing to `total`, joints limited to
    /// `[-limit, limit]`.
    pub fn uniform(n: usize, total: f64, limit: f64) -> Result<Self> {
        Self::new(vec![total / n as f64; n], vec![(-limit, limit); n])
    }

    /// Link lengths decreasing by the golden ratio from the base outwards,
    /// normalized to sum to `total`.
    pub fn golden(n: usize, total: f64, limit: f64) -> Result<Self> {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let raw: Vec<f64> = (0..n).map(|i| phi.powi(-(i as i32))).collect();
        let sum: f64 = raw.iter().sum();
        Self::new(raw.iter().map(|l| l * total / sum).collect(), vec![(-limit, limit); n])
    }

    pub fn n_dof(&self) -> usize {
        self.link_lengths.len()
    }

    pub fn link_lengths(&self) -> &[f64] {
        &self.link_lengths
    }

    pub fn joint_limits(&self) -> &[(f64, f64)] {
        &self.joint_limits
    }

    pub fn total_length(&self) -> f64 {
        self.link_lengths.iter().sum()
    }

    pub fn within_limits(&self, alpha: &Point) -> bool {
        alpha.len() == self.n_dof()
            && alpha.iter().zip(&self.joint_limits).all(|(a, (lo, hi))| *a >= *lo && *a <= *hi)
    }

    /// Clamps every joint into its interval; the flag reports whether any
    /// joint saturated.
    pub fn clamp(&self, alpha: &Point) -> (Point, bool) {
        let mut clamped = false;
        let out = Point::from_iterator(
            alpha.len(),
            alpha.iter().zip(&self.joint_limits).map(|(a, (lo, hi))| {
                let c = a.clamp(*lo, *hi);
                clamped |= c != *a;
                c
            }),
        );
        (out, clamped)
    }

    /// Affine map from the unit cube onto the joint-limit box.
    pub fn rescale(&self, theta: &Point) -> Point {
        Point::from_iterator(
            theta.len(),
            theta.iter().zip(&self.joint_limits).map(|(t, (lo, hi))| lo + t * (hi - lo)),
        )
    }
}

/// Planar end-effector position of the chain, each link oriented by the
/// cumulative sum of the preceding joint angles.
pub fn forward_kinematics(geometry: &ArmGeometry, alpha: &Point) -> Point {
    let mut heading = 0.0;
    let (mut x, mut y) = (0.0, 0.0);
    for (l, a) in geometry.link_lengths.iter().zip(alpha.iter()) {
        heading += a;
        x += l * heading.cos();
        y += l * heading.sin();
    }
    point(&[x, y])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmState {
    pub alpha: Point,
    /// Set when the last update saturated a joint.
    pub clamped: bool,
}

impl ArmState {
    pub fn new(alpha: Point) -> Self {
        ArmState { alpha, clamped: false }
    }
}

/// A joint-angle increment whose norm is bounded at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroAction(Point);

impl MicroAction {
    pub fn new(delta_alpha: Point, max_norm: f64) -> Result<Self> {
        let norm = delta_alpha.norm();
        if !norm.is_finite() || norm > max_norm * (1.0 + 1e-12) {
            return Err(Error::Config(format!("micro-action norm {norm} exceeds bound {max_norm}")));
        }
        Ok(MicroAction(delta_alpha))
    }

    /// Scales `delta_alpha` down onto the norm ball when it is too long.
    pub fn bounded(mut delta_alpha: Point, max_norm: f64) -> Self {
        let norm = delta_alpha.norm();
        if norm > max_norm {
            delta_alpha *= max_norm / norm;
        }
        MicroAction(delta_alpha)
    }

    pub fn delta(&self) -> &Point {
        &self.0
    }
}

/// Applies one micro-action; returns the new state and the end-effector
/// position before and after.
pub fn step_arm(geometry: &ArmGeometry, state: &ArmState, action: &MicroAction) -> (ArmState, Point, Point) {
    let before = forward_kinematics(geometry, &state.alpha);
    let (alpha, clamped) = geometry.clamp(&(&state.alpha + action.delta()));
    let after = forward_kinematics(geometry, &alpha);
    (ArmState { alpha, clamped }, before, after)
}

/// Control parameters of an episodic rollout, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SynergyParams(Point);

impl SynergyParams {
    pub fn new(theta: Point) -> Result<Self> {
        if theta.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::Config(format!("synergy parameters outside [0,1]: {}", theta.transpose())));
        }
        Ok(SynergyParams(theta))
    }

    pub fn clamped(theta: Point) -> Self {
        SynergyParams(theta.map(|t| t.clamp(0.0, 1.0)))
    }

    pub fn as_point(&self) -> &Point {
        &self.0
    }
}

pub fn episodic_rollout(geometry: &ArmGeometry, theta: &SynergyParams) -> Point {
    forward_kinematics(geometry, &geometry.rescale(theta.as_point()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LinkLayout {
    #[default]
    Uniform,
    Golden,
}

/// Rest configuration: one angle for every joint, or an explicit vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RestPose {
    Constant(f64),
    PerJoint(Vec<f64>),
}

fn default_limit() -> f64 {
    PI
}
fn default_rest() -> Option<RestPose> {
    Some(RestPose::Constant(DEFAULT_REST_ANGLE))
}
fn default_max_step() -> f64 {
    DEFAULT_MAX_STEP
}

/// Serializable arm description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmSpec {
    pub n_dof: usize,
    pub total_length: f64,
    #[serde(default)]
    pub layout: LinkLayout,
    /// Symmetric joint limit in radians.
    #[serde(default = "default_limit")]
    pub joint_limit: f64,
    /// For the micro-action arm: joint angles. For the episodic arm:
    /// parameters in the unit cube.
    #[serde(default = "default_rest")]
    pub rest: Option<RestPose>,
    #[serde(default = "default_max_step")]
    pub max_step: f64,
}

impl ArmSpec {
    pub fn new(n_dof: usize, total_length: f64) -> Self {
        ArmSpec {
            n_dof,
            total_length,
            layout: LinkLayout::Uniform,
            joint_limit: PI,
            rest: default_rest(),
            max_step: DEFAULT_MAX_STEP,
        }
    }

    pub fn geometry(&self) -> Result<ArmGeometry> {
        if self.n_dof == 0 {
            return Err(Error::Config("n_dof must be positive".into()));
        }
        if !(self.joint_limit > 0.0) {
            return Err(Error::Config("joint_limit must be positive".into()));
        }
        match self.layout {
            LinkLayout::Uniform => ArmGeometry::uniform(self.n_dof, self.total_length, self.joint_limit),
            LinkLayout::Golden => ArmGeometry::golden(self.n_dof, self.total_length, self.joint_limit),
        }
    }

    pub fn rest_vector(&self) -> Result<Point> {
        match &self.rest {
            None => Err(Error::Config("arm has no rest pose".into())),
            Some(RestPose::Constant(a)) => Ok(Point::from_element(self.n_dof, *a)),
            Some(RestPose::PerJoint(v)) if v.len() == self.n_dof => Ok(point(v)),
            Some(RestPose::PerJoint(v)) => Err(Error::DimensionMismatch { expected: self.n_dof, actual: v.len() }),
        }
    }
}

/// The configured rest joint vector.
pub fn reset_to_rest(spec: &ArmSpec) -> Result<ArmState> {
    let alpha = spec.rest_vector()?;
    let geometry = spec.geometry()?;
    if !geometry.within_limits(&alpha) {
        return Err(Error::Config(format!("rest pose outside joint limits: {}", alpha.transpose())));
    }
    Ok(ArmState::new(alpha))
}

/// Membership in the set of task-space points the system can reach.
pub trait Reachability {
    fn is_reachable(&self, y: &Point) -> bool;
    /// A box containing the reachable set.
    fn reachable_box(&self) -> Bounds;
}

/// Disk of radius `total_length` around the base. Exact for arms whose joints
/// can fold fully; an over-approximation otherwise.
#[derive(Debug, Clone, Copy)]
pub struct DiskReach {
    pub radius: f64,
}

impl Reachability for DiskReach {
    fn is_reachable(&self, y: &Point) -> bool {
        y.norm() <= self.radius
    }

    fn reachable_box(&self) -> Bounds {
        Bounds { lo: vec![-self.radius; 2], hi: vec![self.radius; 2] }
    }
}

/// One observed micro-action.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub alpha_before: Point,
    /// The increment actually applied, after joint clamping.
    pub delta_alpha: Point,
    pub y_before: Point,
    pub y_after: Point,
    pub clamped: bool,
}

/// An environment whose context evolves with every micro-action.
pub trait MicroActionEnv {
    fn n_dof(&self) -> usize;
    fn task_dim(&self) -> usize;
    fn alpha(&self) -> &Point;
    fn position(&self) -> &Point;
    fn max_step(&self) -> f64;
    fn step(&mut self, delta_alpha: &Point) -> StepRecord;
    fn reset(&mut self);
}

/// An environment whose context is reset before every rollout.
pub trait EpisodicEnv {
    fn param_dim(&self) -> usize;
    fn task_dim(&self) -> usize;
    fn rollout(&self, theta: &Point) -> Point;
    fn rest_params(&self) -> Point;
    fn rest_effect(&self) -> Point {
        self.rollout(&self.rest_params())
    }
}

#[derive(Debug, Clone)]
pub struct ArmEnv {
    geometry: ArmGeometry,
    rest: Point,
    state: ArmState,
    position: Point,
    max_step: f64,
}

impl ArmEnv {
    pub fn new(geometry: ArmGeometry, rest: Point, max_step: f64) -> Result<Self> {
        if rest.len() != geometry.n_dof() {
            return Err(Error::DimensionMismatch { expected: geometry.n_dof(), actual: rest.len() });
        }
        if !geometry.within_limits(&rest) {
            return Err(Error::Config("rest pose outside joint limits".into()));
        }
        let position = forward_kinematics(&geometry, &rest);
        Ok(ArmEnv { state: ArmState::new(rest.clone()), geometry, rest, position, max_step })
    }

    pub fn from_spec(spec: &ArmSpec) -> Result<Self> {
        Self::new(spec.geometry()?, reset_to_rest(spec)?.alpha, spec.max_step)
    }

    pub fn geometry(&self) -> &ArmGeometry {
        &self.geometry
    }

    pub fn state(&self) -> &ArmState {
        &self.state
    }

    pub fn rest(&self) -> &Point {
        &self.rest
    }

    pub fn rest_position(&self) -> Point {
        forward_kinematics(&self.geometry, &self.rest)
    }

    pub fn reach(&self) -> DiskReach {
        DiskReach { radius: self.geometry.total_length() }
    }
}

impl MicroActionEnv for ArmEnv {
    fn n_dof(&self) -> usize {
        self.geometry.n_dof()
    }

    fn task_dim(&self) -> usize {
        2
    }

    fn alpha(&self) -> &Point {
        &self.state.alpha
    }

    fn position(&self) -> &Point {
        &self.position
    }

    fn max_step(&self) -> f64 {
        self.max_step
    }

    fn step(&mut self, delta_alpha: &Point) -> StepRecord {
        let action = MicroAction::bounded(delta_alpha.clone(), self.max_step);
        let alpha_before = self.state.alpha.clone();
        let (next, y_before, y_after) = step_arm(&self.geometry, &self.state, &action);
        let applied = &next.alpha - &alpha_before;
        let clamped = next.clamped;
        self.state = next;
        self.position = y_after.clone();
        StepRecord { alpha_before, delta_alpha: applied, y_before, y_after, clamped }
    }

    fn reset(&mut self) {
        self.state = ArmState::new(self.rest.clone());
        self.position = forward_kinematics(&self.geometry, &self.rest);
    }
}

/// Episodic arm: parameters in the unit cube rescaled onto the joint limits.
#[derive(Debug, Clone)]
pub struct SynergyArm {
    geometry: ArmGeometry,
    rest_params: Point,
}

impl SynergyArm {
    pub fn new(geometry: ArmGeometry, rest_params: Point) -> Result<Self> {
        if rest_params.len() != geometry.n_dof() {
            return Err(Error::DimensionMismatch { expected: geometry.n_dof(), actual: rest_params.len() });
        }
        SynergyParams::new(rest_params.clone())?;
        Ok(SynergyArm { geometry, rest_params })
    }

    pub fn from_spec(spec: &ArmSpec) -> Result<Self> {
        Self::new(spec.geometry()?, spec.rest_vector()?)
    }

    pub fn geometry(&self) -> &ArmGeometry {
        &self.geometry
    }

    pub fn reach(&self) -> DiskReach {
        DiskReach { radius: self.geometry.total_length() }
    }
}

impl EpisodicEnv for SynergyArm {
    fn param_dim(&self) -> usize {
        self.geometry.n_dof()
    }

    fn task_dim(&self) -> usize {
        2
    }

    fn rollout(&self, theta: &Point) -> Point {
        episodic_rollout(&self.geometry, &SynergyParams::clamped(theta.clone()))
    }

    fn rest_params(&self) -> Point {
        self.rest_params.clone()
    }
}
