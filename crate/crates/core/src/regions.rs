//! Region tree over the goal space.
//!
//! Each leaf keeps the competences of the goals attempted inside it, in the
//! order they were attempted, and caches an interest value: the absolute
//! difference between the summed competences of the older and newer halves of
//! its most recent window. Leaves holding too many goals are split along the
//! candidate cut that best separates interest levels. Goals are then sampled
//! preferentially in interesting leaves.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::rng::StreamRng;
use crate::space::{Bounds, Point};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalOrigin {
    SelfGenerated,
    Subgoal,
    EnRoute,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoalRecord {
    pub position: Point,
    pub gamma: f64,
    pub order_index: u64,
    pub origin: GoalOrigin,
}

/// How a goal was generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalMode {
    /// Uniform inside a leaf drawn in proportion to its interest.
    Interest,
    /// Uniform over the whole space.
    Random,
    /// Near the least competent recent goal of a leaf drawn by interest.
    LowCompetence,
}

impl GoalMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            GoalMode::Interest => "interest",
            GoalMode::Random => "random",
            GoalMode::LowCompetence => "low_competence",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionParams {
    /// Interest window.
    #[serde(default = "d_zeta")]
    pub zeta: usize,
    /// Records a leaf may hold before it splits.
    #[serde(default = "d_g_max")]
    pub g_max: usize,
    /// Random cuts evaluated per split.
    #[serde(default = "d_split_candidates")]
    pub split_candidates: usize,
    #[serde(default = "d_max_depth")]
    pub max_depth: usize,
    /// Mode percentages; must sum to 100.
    #[serde(default = "d_p1")]
    pub p1: f64,
    #[serde(default = "d_p2")]
    pub p2: f64,
    #[serde(default = "d_p3")]
    pub p3: f64,
    /// Standard deviation of the low-competence perturbation as a fraction
    /// of the leaf diagonal.
    #[serde(default = "d_mode3_sigma")]
    pub mode3_sigma: f64,
    /// Whether en-route records count toward the split threshold.
    #[serde(default = "d_true")]
    pub en_route_counts: bool,
}

fn d_zeta() -> usize {
    24
}
fn d_g_max() -> usize {
    50
}
fn d_split_candidates() -> usize {
    50
}
fn d_max_depth() -> usize {
    20
}
fn d_p1() -> f64 {
    70.0
}
fn d_p2() -> f64 {
    20.0
}
fn d_p3() -> f64 {
    10.0
}
fn d_mode3_sigma() -> f64 {
    0.05
}
fn d_true() -> bool {
    true
}

impl Default for RegionParams {
    fn default() -> Self {
        RegionParams {
            zeta: d_zeta(),
            g_max: d_g_max(),
            split_candidates: d_split_candidates(),
            max_depth: d_max_depth(),
            p1: d_p1(),
            p2: d_p2(),
            p3: d_p3(),
            mode3_sigma: d_mode3_sigma(),
            en_route_counts: true,
        }
    }
}

impl RegionParams {
    pub fn validate(&self) -> Result<()> {
        if self.zeta < 2 || self.zeta % 2 != 0 {
            return Err(Error::Config(format!("zeta must be even and >= 2, got {}", self.zeta)));
        }
        if self.g_max < 2 {
            return Err(Error::Config("g_max must be at least 2".into()));
        }
        if self.split_candidates == 0 {
            return Err(Error::Config("split_candidates must be positive".into()));
        }
        let ps = [self.p1, self.p2, self.p3];
        if ps.iter().any(|p| !(*p >= 0.0)) || (ps.iter().sum::<f64>() - 100.0).abs() > 1e-9 {
            return Err(Error::Config(format!("p1 + p2 + p3 must equal 100, got {ps:?}")));
        }
        if !(self.mode3_sigma >= 0.0) {
            return Err(Error::Config("mode3_sigma must be non-negative".into()));
        }
        Ok(())
    }
}

/// Interest of an ordered competence sequence: over the last `zeta` values
/// (or the largest even number available when fewer exist), the absolute
/// difference between the sums of the older and newer halves, divided by
/// `zeta`.
pub fn interest_of(gammas: &[f64], zeta: usize) -> f64 {
    let n = gammas.len();
    let mut w = n.min(zeta);
    w -= w % 2;
    if w < 2 {
        return 0.0;
    }
    let half = w / 2;
    let older: f64 = gammas[n - w..n - half].iter().sum();
    let newer: f64 = gammas[n - half..].iter().sum();
    (older - newer).abs() / zeta as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitCandidate {
    pub dim: usize,
    pub value: f64,
    pub qual: f64,
    pub left_count: usize,
    pub right_count: usize,
}

impl SplitCandidate {
    fn balance(&self) -> usize {
        self.left_count * self.right_count
    }

    fn beats(&self, other: &SplitCandidate) -> bool {
        self.qual > other.qual || (self.qual == other.qual && self.balance() > other.balance())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitChoice {
    pub chosen: SplitCandidate,
    /// Every random candidate evaluated, in draw order.
    pub candidates: Vec<SplitCandidate>,
    /// Set when no random candidate separated the records and the median
    /// cut on the widest dimension was used instead.
    pub fallback: bool,
}

#[derive(Debug, Clone)]
struct Node {
    bounds: Bounds,
    records: Vec<GoalRecord>,
    interest: f64,
    next_index: u64,
    depth: usize,
    children: Option<(usize, f64, usize, usize)>,
}

fn tail_interest(records: &[GoalRecord], zeta: usize) -> f64 {
    let gammas: Vec<f64> = records[records.len().saturating_sub(zeta)..].iter().map(|r| r.gamma).collect();
    interest_of(&gammas, zeta)
}

impl Node {
    fn leaf(bounds: Bounds, records: Vec<GoalRecord>, next_index: u64, depth: usize, zeta: usize) -> Self {
        Node { bounds, interest: tail_interest(&records, zeta), records, next_index, depth, children: None }
    }
}

#[derive(Debug, Clone)]
pub struct UpdateReport {
    pub leaf: usize,
    /// The position lay outside the root box and was clamped onto it.
    pub clamped: bool,
    pub split: Option<SplitChoice>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafSnapshot {
    pub bounds: Bounds,
    pub interest: f64,
    pub count: usize,
}

const SPLIT_RETRIES: usize = 10;

#[derive(Debug, Clone)]
pub struct RegionTree {
    nodes: Vec<Node>,
    leaves: Vec<usize>,
    params: RegionParams,
    split_rng: StreamRng,
    updates: u64,
}

impl RegionTree {
    pub fn new(root: Bounds, params: RegionParams, split_rng: StreamRng) -> Result<Self> {
        params.validate()?;
        let root = Node::leaf(root, Vec::new(), 0, 0, params.zeta);
        Ok(RegionTree { nodes: vec![root], leaves: vec![0], params, split_rng, updates: 0 })
    }

    pub fn params(&self) -> &RegionParams {
        &self.params
    }

    pub fn root_bounds(&self) -> &Bounds {
        &self.nodes[0].bounds
    }

    pub fn dim(&self) -> usize {
        self.root_bounds().dim()
    }

    /// Leaf ids in creation order.
    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    pub fn leaf_bounds(&self, leaf: usize) -> &Bounds {
        &self.nodes[leaf].bounds
    }

    pub fn leaf_records(&self, leaf: usize) -> &[GoalRecord] {
        &self.nodes[leaf].records
    }

    pub fn interest(&self, leaf: usize) -> f64 {
        self.nodes[leaf].interest
    }

    pub fn min_interest(&self) -> f64 {
        self.leaves.iter().map(|&l| self.nodes[l].interest).fold(f64::INFINITY, f64::min)
    }

    pub fn total_records(&self) -> usize {
        self.leaves.iter().map(|&l| self.nodes[l].records.len()).sum()
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Leaf containing `p`; points outside the root are clamped first.
    pub fn leaf_of(&self, p: &Point) -> usize {
        let mut node = 0;
        while let Some((dim, value, left, right)) = self.nodes[node].children {
            node = if p[dim] < value { left } else { right };
        }
        node
    }

    /// Appends a competence record to the leaf containing `position`,
    /// refreshes that leaf's interest and splits it when it is full.
    pub fn update(&mut self, position: &Point, gamma: f64, origin: GoalOrigin) -> UpdateReport {
        let root = self.root_bounds();
        let clamped = !root.contains(position);
        let position = if clamped { root.clamp(position) } else { position.clone() };
        let leaf = self.leaf_of(&position);
        let zeta = self.params.zeta;
        let node = &mut self.nodes[leaf];
        node.records.push(GoalRecord { position, gamma, order_index: node.next_index, origin });
        node.next_index += 1;
        node.interest = tail_interest(&node.records, zeta);
        self.updates += 1;

        let counted = if self.params.en_route_counts {
            node.records.len()
        } else {
            node.records.iter().filter(|r| r.origin != GoalOrigin::EnRoute).count()
        };
        let split = if counted > self.params.g_max && node.depth < self.params.max_depth {
            let mut rng = self.split_rng.clone();
            let choice = self.split(leaf, &mut rng);
            self.split_rng = rng;
            self.apply_split(leaf, choice.chosen.dim, choice.chosen.value);
            Some(choice)
        } else {
            None
        };
        UpdateReport { leaf, clamped, split }
    }

    fn evaluate_cut(&self, leaf: usize, dim: usize, value: f64) -> SplitCandidate {
        let (left, right): (Vec<&GoalRecord>, Vec<&GoalRecord>) =
            self.nodes[leaf].records.iter().partition(|r| r.position[dim] < value);
        let interest = |side: &[&GoalRecord]| {
            let gammas: Vec<f64> = side.iter().map(|r| r.gamma).collect();
            interest_of(&gammas, self.params.zeta)
        };
        let (il, ir) = (interest(&left), interest(&right));
        SplitCandidate {
            dim,
            value,
            qual: (left.len() * right.len()) as f64 * (il - ir).abs(),
            left_count: left.len(),
            right_count: right.len(),
        }
    }

    /// Picks the cut of `leaf` maximizing `|left| * |right| * |interest_l -
    /// interest_r|` among random candidates; ties go to the most balanced.
    pub fn split<R: Rng + ?Sized>(&self, leaf: usize, rng: &mut R) -> SplitChoice {
        let bounds = &self.nodes[leaf].bounds;
        let mut candidates = Vec::new();
        for _ in 0..SPLIT_RETRIES {
            let round: Vec<SplitCandidate> = (0..self.params.split_candidates)
                .map(|_| {
                    let dim = rng.random_range(0..bounds.dim());
                    let value = bounds.lo[dim] + rng.random::<f64>() * bounds.width(dim);
                    self.evaluate_cut(leaf, dim, value)
                })
                .collect();
            let separates = round.iter().any(|c| c.balance() > 0);
            candidates.extend(round);
            if separates {
                let chosen = candidates
                    .iter()
                    .fold(None::<&SplitCandidate>, |best, c| match best {
                        Some(b) if !c.beats(b) => Some(b),
                        _ => Some(c),
                    })
                    .expect("at least one candidate")
                    .clone();
                return SplitChoice { chosen, candidates, fallback: false };
            }
        }
        let dim = (0..bounds.dim()).fold(0, |best, j| if bounds.width(j) > bounds.width(best) { j } else { best });
        let mut values: Vec<f64> = self.nodes[leaf].records.iter().map(|r| r.position[dim]).collect();
        values.sort_by(f64::total_cmp);
        let mut value = values[values.len() / 2];
        if value <= values[0] {
            value = values
                .iter()
                .copied()
                .find(|v| *v > values[0])
                .unwrap_or(bounds.lo[dim] + 0.5 * bounds.width(dim));
        }
        SplitChoice { chosen: self.evaluate_cut(leaf, dim, value), candidates, fallback: true }
    }

    fn apply_split(&mut self, leaf: usize, dim: usize, value: f64) {
        let zeta = self.params.zeta;
        let node = &mut self.nodes[leaf];
        let records = std::mem::take(&mut node.records);
        let (lb, rb) = node.bounds.split(dim, value);
        let (next, depth) = (node.next_index, node.depth + 1);
        let (lr, rr): (Vec<GoalRecord>, Vec<GoalRecord>) = records.into_iter().partition(|r| r.position[dim] < value);
        node.interest = 0.0;
        let left = self.nodes.len();
        self.nodes.push(Node::leaf(lb, lr, next, depth, zeta));
        self.nodes.push(Node::leaf(rb, rr, next, depth, zeta));
        self.nodes[leaf].children = Some((dim, value, left, left + 1));
        let pos = self.leaves.iter().position(|&l| l == leaf).expect("split target is a leaf");
        self.leaves[pos] = left;
        self.leaves.push(left + 1);
    }

    /// Leaf selection probabilities: interest minus the minimum interest,
    /// normalized; uniform when every leaf is equally interesting.
    pub fn region_probabilities(&self) -> Vec<(usize, f64)> {
        let min = self.min_interest();
        let shifted: Vec<f64> = self.leaves.iter().map(|&l| self.nodes[l].interest - min).collect();
        let total: f64 = shifted.iter().sum();
        if total > 0.0 {
            self.leaves.iter().zip(shifted).map(|(&l, s)| (l, s / total)).collect()
        } else {
            let p = 1.0 / self.leaves.len() as f64;
            self.leaves.iter().map(|&l| (l, p)).collect()
        }
    }

    pub fn sample_leaf<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let probs = self.region_probabilities();
        let mut u = rng.random::<f64>();
        for &(leaf, p) in &probs {
            if u < p {
                return leaf;
            }
            u -= p;
        }
        // rounding left a sliver: fall back to the last leaf with mass
        probs.iter().rev().find(|(_, p)| *p > 0.0).map(|(l, _)| *l).unwrap_or(probs[0].0)
    }

    pub fn sample_mode<R: Rng + ?Sized>(&self, rng: &mut R) -> GoalMode {
        let u = rng.random::<f64>() * 100.0;
        if u < self.params.p1 {
            GoalMode::Interest
        } else if u < self.params.p1 + self.params.p2 {
            GoalMode::Random
        } else {
            GoalMode::LowCompetence
        }
    }

    pub fn goal_for_mode<R: Rng + ?Sized>(&self, mode: GoalMode, rng: &mut R) -> Point {
        match mode {
            GoalMode::Random => self.root_bounds().sample(rng),
            GoalMode::Interest => {
                let leaf = self.sample_leaf(rng);
                self.nodes[leaf].bounds.sample(rng)
            }
            GoalMode::LowCompetence => {
                let leaf = self.sample_leaf(rng);
                let node = &self.nodes[leaf];
                let window = &node.records[node.records.len().saturating_sub(self.params.zeta)..];
                let worst = window.iter().fold(None::<&GoalRecord>, |w, r| match w {
                    Some(w) if w.gamma <= r.gamma => Some(w),
                    _ => Some(r),
                });
                match worst {
                    None => node.bounds.sample(rng),
                    Some(r) => {
                        let sigma = self.params.mode3_sigma * node.bounds.diagonal();
                        let noise = Normal::new(0.0, sigma).expect("finite sigma");
                        let p = r.position.map(|x| x + noise.sample(rng));
                        node.bounds.clamp(&p)
                    }
                }
            }
        }
    }

    /// Draws a mode with probabilities p1/p2/p3 and a goal for it.
    pub fn select_goal<R: Rng + ?Sized>(&self, rng: &mut R) -> (Point, GoalMode) {
        let mode = self.sample_mode(rng);
        (self.goal_for_mode(mode, rng), mode)
    }

    pub fn leaf_snapshot(&self) -> Vec<LeafSnapshot> {
        self.leaves
            .iter()
            .map(|&l| LeafSnapshot {
                bounds: self.nodes[l].bounds.clone(),
                interest: self.nodes[l].interest,
                count: self.nodes[l].records.len(),
            })
            .collect()
    }
}
