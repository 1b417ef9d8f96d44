//! Sensorimotor memory and local linear models.
//!
//! An evolving-context memory stores `(alpha, delta_alpha, delta_y)` triples
//! indexed by `alpha`; local Jacobians are fitted on the nearest stored
//! contexts. A fixed-context memory stores `(theta, y)` pairs indexed both by
//! effect and by parameters, which is what the two-stage local inverse needs.

mod kdtree;
mod linalg;

use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use kdtree::KdTree;
pub use linalg::{fit_linear, pseudo_inverse};

use crate::space::Point;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextKind {
    /// Context carried over between micro-actions; entries hold increments.
    Evolving,
    /// Context reset before every rollout; entries hold absolute effects.
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorimotorEntry {
    /// Joint angles (evolving) or synergy parameters (fixed).
    pub context: Point,
    /// Joint increment; absent for fixed-context entries.
    pub action: Option<Point>,
    /// Task-space increment (evolving) or position (fixed).
    pub effect: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryParams {
    /// Neighbours used for a local Jacobian.
    #[serde(default = "default_k")]
    pub jacobian_k: usize,
    /// Neighbours farther than this (in context units) do not count as support.
    #[serde(default = "default_radius")]
    pub support_radius: f64,
    /// Support needed before a Jacobian is trusted; defaults to twice the
    /// task dimension.
    #[serde(default)]
    pub min_support: Option<usize>,
    /// Approximation factor of neighbour queries; 0 is exact.
    #[serde(default)]
    pub eps_ann: f64,
}

fn default_k() -> usize {
    12
}
fn default_radius() -> f64 {
    0.5
}

impl Default for MemoryParams {
    fn default() -> Self {
        MemoryParams { jacobian_k: default_k(), support_radius: default_radius(), min_support: None, eps_ann: 0.0 }
    }
}

/// A local linear map `effect ≈ J · input` and its pseudo-inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalLinearModel {
    pub jacobian: DMatrix<f64>,
    pub pseudo_inverse: DMatrix<f64>,
    pub support_size: usize,
}

impl LocalLinearModel {
    pub fn from_jacobian(jacobian: DMatrix<f64>, support_size: usize) -> Self {
        let pseudo_inverse = pseudo_inverse(&jacobian);
        LocalLinearModel { jacobian, pseudo_inverse, support_size }
    }
}

/// Result of the two-stage fixed-context inverse query.
#[derive(Debug, Clone)]
pub struct InverseEstimate {
    pub params: Point,
    pub model: LocalLinearModel,
    /// Indices of the selected neighbour set.
    pub support: Vec<usize>,
    /// Set when the memory held fewer than `l` entries.
    pub fell_back: bool,
}

#[derive(Debug, Clone)]
pub struct SensorimotorMemory {
    kind: ContextKind,
    context_dim: usize,
    effect_dim: usize,
    entries: Vec<SensorimotorEntry>,
    by_context: KdTree,
    by_effect: Option<KdTree>,
    params: MemoryParams,
}

impl SensorimotorMemory {
    pub fn evolving(n_dof: usize, task_dim: usize, params: MemoryParams) -> Self {
        Self::with_kind(ContextKind::Evolving, n_dof, task_dim, params)
    }

    pub fn fixed(param_dim: usize, task_dim: usize, params: MemoryParams) -> Self {
        Self::with_kind(ContextKind::Fixed, param_dim, task_dim, params)
    }

    fn with_kind(kind: ContextKind, context_dim: usize, effect_dim: usize, params: MemoryParams) -> Self {
        SensorimotorMemory {
            kind,
            context_dim,
            effect_dim,
            entries: Vec::new(),
            by_context: KdTree::new(context_dim),
            by_effect: (kind == ContextKind::Fixed).then(|| KdTree::new(effect_dim)),
            params,
        }
    }

    pub fn kind(&self) -> ContextKind {
        self.kind
    }

    pub fn context_dim(&self) -> usize {
        self.context_dim
    }

    pub fn effect_dim(&self) -> usize {
        self.effect_dim
    }

    pub fn params(&self) -> &MemoryParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[SensorimotorEntry] {
        &self.entries
    }

    pub fn entry(&self, index: usize) -> &SensorimotorEntry {
        &self.entries[index]
    }

    pub fn insert(&mut self, entry: SensorimotorEntry) -> Result<()> {
        let check = |expected: usize, actual: usize| {
            if expected == actual {
                Ok(())
            } else {
                Err(Error::DimensionMismatch { expected, actual })
            }
        };
        check(self.context_dim, entry.context.len())?;
        check(self.effect_dim, entry.effect.len())?;
        match (self.kind, &entry.action) {
            (ContextKind::Evolving, Some(a)) => check(self.context_dim, a.len())?,
            (ContextKind::Evolving, None) => return Err(Error::Format("evolving entry needs an action".into())),
            (ContextKind::Fixed, Some(_)) => return Err(Error::Format("fixed entry cannot carry an action".into())),
            (ContextKind::Fixed, None) => {}
        }
        self.by_context.insert(entry.context.as_slice());
        if let Some(tree) = &mut self.by_effect {
            tree.insert(entry.effect.as_slice());
        }
        self.entries.push(entry);
        Ok(())
    }

    /// Entries nearest to `key`: by context for evolving memories, by effect
    /// for fixed ones. Saturates at the memory size.
    pub fn nearest(&self, key: &Point, k: usize) -> Result<Vec<(usize, f64)>> {
        match &self.by_effect {
            Some(tree) => self.query(tree, key, k),
            None => self.query(&self.by_context, key, k),
        }
    }

    pub fn nearest_context(&self, key: &Point, k: usize) -> Result<Vec<(usize, f64)>> {
        self.query(&self.by_context, key, k)
    }

    fn query(&self, tree: &KdTree, key: &Point, k: usize) -> Result<Vec<(usize, f64)>> {
        if self.is_empty() {
            return Err(Error::EmptyMemory);
        }
        if key.len() != tree.dim() {
            return Err(Error::DimensionMismatch { expected: tree.dim(), actual: key.len() });
        }
        Ok(tree.nearest(key.as_slice(), k.max(1), self.params.eps_ann))
    }

    pub fn min_support(&self) -> usize {
        self.params.min_support.unwrap_or(2 * self.effect_dim)
    }

    /// Least-squares Jacobian of `delta_y ≈ J · delta_alpha` over the `k`
    /// stored contexts nearest to `alpha` within the support radius.
    pub fn local_jacobian(&self, alpha: &Point, k: usize) -> Result<LocalLinearModel> {
        if self.kind != ContextKind::Evolving {
            return Err(Error::Format("local_jacobian needs an evolving-context memory".into()));
        }
        let needed = self.min_support();
        if self.is_empty() {
            return Err(Error::InsufficientSupport { found: 0, needed });
        }
        let support: Vec<usize> = self
            .nearest_context(alpha, k)?
            .into_iter()
            .filter(|(_, d)| *d <= self.params.support_radius)
            .map(|(i, _)| i)
            .collect();
        if support.len() < needed {
            return Err(Error::InsufficientSupport { found: support.len(), needed });
        }
        let n = self.context_dim;
        let m = self.effect_dim;
        let inputs = DMatrix::from_fn(support.len(), n, |r, c| {
            self.entries[support[r]].action.as_ref().expect("evolving entry")[c]
        });
        let outputs = DMatrix::from_fn(support.len(), m, |r, c| self.entries[support[r]].effect[c]);
        Ok(LocalLinearModel::from_jacobian(fit_linear(&inputs, &outputs), support.len()))
    }

    /// Two-stage local inverse for fixed-context memories.
    ///
    /// The `l` entries whose effects are nearest to `goal` each seed a
    /// candidate set made of the `m` entries nearest to its parameters. The
    /// candidate whose parameters are least spread out (sum over components
    /// of the sample standard deviation) is kept, an affine forward model is
    /// fitted on it, and its pseudo-inverse maps the goal back to parameters.
    pub fn local_inverse_fixed_context(&self, goal: &Point, l: usize, m: usize) -> Result<InverseEstimate> {
        if self.kind != ContextKind::Fixed {
            return Err(Error::Format("local inverse needs a fixed-context memory".into()));
        }
        let fell_back = self.len() < l;
        let seeds = self.nearest(goal, l.min(self.len()))?;
        let mut best: Option<(f64, Vec<usize>)> = None;
        for (seed, _) in seeds {
            let set: Vec<usize> =
                self.nearest_context(&self.entries[seed].context, m)?.into_iter().map(|(i, _)| i).collect();
            let spread = self.param_spread(&set);
            if best.as_ref().is_none_or(|(s, _)| spread < *s) {
                best = Some((spread, set));
            }
        }
        let (_, support) = best.expect("non-empty memory");
        let (model, theta_bar, y_bar) = self.fit_affine(&support);
        let params = (theta_bar + &model.pseudo_inverse * (goal - y_bar)).map(|t| t.clamp(0.0, 1.0));
        Ok(InverseEstimate { params, model, support, fell_back })
    }

    /// Sum over components of the sample standard deviation of the stored
    /// parameters of `set`.
    pub fn param_spread(&self, set: &[usize]) -> f64 {
        let n = set.len();
        if n < 2 {
            return 0.0;
        }
        (0..self.context_dim)
            .map(|c| {
                let mean = set.iter().map(|&i| self.entries[i].context[c]).sum::<f64>() / n as f64;
                let var =
                    set.iter().map(|&i| (self.entries[i].context[c] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                var.sqrt()
            })
            .sum()
    }

    /// Affine fit `y ≈ y_bar + J (theta - theta_bar)` over `set`.
    fn fit_affine(&self, set: &[usize]) -> (LocalLinearModel, Point, Point) {
        let n = set.len() as f64;
        let theta_bar = set.iter().fold(Point::zeros(self.context_dim), |acc, &i| acc + &self.entries[i].context) / n;
        let y_bar = set.iter().fold(Point::zeros(self.effect_dim), |acc, &i| acc + &self.entries[i].effect) / n;
        let inputs =
            DMatrix::from_fn(set.len(), self.context_dim, |r, c| self.entries[set[r]].context[c] - theta_bar[c]);
        let outputs = DMatrix::from_fn(set.len(), self.effect_dim, |r, c| self.entries[set[r]].effect[c] - y_bar[c]);
        (LocalLinearModel::from_jacobian(fit_linear(&inputs, &outputs), set.len()), theta_bar, y_bar)
    }

    /// Forward prediction of the effect of `theta` from its `k` nearest
    /// stored parameter vectors (fixed-context memories).
    pub fn predict_effect(&self, theta: &Point, k: usize) -> Result<Point> {
        if self.kind != ContextKind::Fixed {
            return Err(Error::Format("predict_effect needs a fixed-context memory".into()));
        }
        let set: Vec<usize> = self.nearest_context(theta, k)?.into_iter().map(|(i, _)| i).collect();
        let (model, theta_bar, y_bar) = self.fit_affine(&set);
        Ok(y_bar + model.jacobian * (theta - theta_bar))
    }

    /// CSV dump, one row per entry. Column names encode the layout: `c*`
    /// context, `a*` action, `e*` effect.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..self.context_dim).map(|i| format!("c{i}")).collect();
        if self.kind == ContextKind::Evolving {
            header.extend((0..self.context_dim).map(|i| format!("a{i}")));
        }
        header.extend((0..self.effect_dim).map(|i| format!("e{i}")));
        w.write_record(&header)?;
        for e in &self.entries {
            let row = e
                .context
                .iter()
                .chain(e.action.iter().flat_map(|a| a.iter()))
                .chain(e.effect.iter())
                .map(|x| x.to_string());
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, params: MemoryParams) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        let count = |prefix: char| header.iter().filter(|h| h.starts_with(prefix)).count();
        let (c, a, e) = (count('c'), count('a'), count('e'));
        if c + a + e != header.len() || c == 0 || e == 0 || (a != 0 && a != c) {
            return Err(Error::Format(format!("unrecognised memory header: {:?}", header)));
        }
        let mut memory = if a > 0 { Self::evolving(c, e, params) } else { Self::fixed(c, e, params) };
        for (line, record) in r.records().enumerate() {
            let record = record?;
            let values: Vec<f64> = record
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|err| Error::Format(format!("memory row {}: {err}", line + 2)))?;
            let context = Point::from_column_slice(&values[..c]);
            let action = (a > 0).then(|| Point::from_column_slice(&values[c..c + a]));
            let effect = Point::from_column_slice(&values[c + a..]);
            memory.insert(SensorimotorEntry { context, action, effect })?;
        }
        Ok(memory)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::point;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn evolving_entry(alpha: &[f64], action: &[f64], effect: &[f64]) -> SensorimotorEntry {
        SensorimotorEntry { context: point(alpha), action: Some(point(action)), effect: point(effect) }
    }

    fn fixed_entry(theta: &[f64], y: &[f64]) -> SensorimotorEntry {
        SensorimotorEntry { context: point(theta), action: None, effect: point(y) }
    }

    #[test]
    fn insert_then_nearest() {
        let mut mem = SensorimotorMemory::evolving(2, 2, MemoryParams::default());
        assert!(matches!(mem.nearest(&point(&[0.0, 0.0]), 1), Err(Error::EmptyMemory)));
        let e = evolving_entry(&[0.1, 0.2], &[0.01, 0.0], &[0.5, 0.5]);
        mem.insert(e.clone()).unwrap();
        assert_eq!(mem.len(), 1);
        let got = mem.nearest(&e.context, 1).unwrap();
        assert_eq!(mem.entry(got[0].0), &e);
        assert_eq!(mem.nearest(&point(&[9.0, -9.0]), 5).unwrap().len(), 1);
        mem.insert(e.clone()).unwrap();
        assert_eq!(mem.len(), 2);
        assert_eq!(mem.nearest(&e.context, 2).unwrap().len(), 2);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let mut mem = SensorimotorMemory::evolving(2, 2, MemoryParams::default());
        assert!(mem.insert(evolving_entry(&[0.1], &[0.0, 0.0], &[0.0, 0.0])).is_err());
        assert!(mem.insert(evolving_entry(&[0.1, 0.0], &[0.0, 0.0], &[0.0])).is_err());
        assert!(mem.insert(fixed_entry(&[0.1, 0.0], &[0.0, 0.0])).is_err());
        let mut fixed = SensorimotorMemory::fixed(2, 2, MemoryParams::default());
        assert!(fixed.insert(evolving_entry(&[0.1, 0.0], &[0.0, 0.0], &[0.0, 0.0])).is_err());
    }

    #[test]
    fn jacobian_recovers_linear_map() {
        let j0 = DMatrix::from_row_slice(2, 3, &[1.0, -0.5, 2.0, 0.3, 0.8, -1.2]);
        let mut mem = SensorimotorMemory::evolving(3, 2, MemoryParams { jacobian_k: 8, ..Default::default() });
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..8 {
            let alpha = Point::from_fn(3, |_, _| rng.random::<f64>() * 0.1);
            let da = Point::from_fn(3, |_, _| rng.random::<f64>() - 0.5);
            let dy = &j0 * &da;
            mem.insert(SensorimotorEntry { context: alpha, action: Some(da), effect: dy }).unwrap();
        }
        let model = mem.local_jacobian(&point(&[0.05, 0.05, 0.05]), 8).unwrap();
        assert!((&model.jacobian - &j0).norm() < 1e-6);
        assert_eq!(model.support_size, 8);
        let identity = &model.jacobian * &model.pseudo_inverse;
        assert_abs_diff_eq!(identity, DMatrix::identity(2, 2), epsilon = 1e-9);
    }

    #[test]
    fn jacobian_needs_support() {
        let mut mem = SensorimotorMemory::evolving(2, 2, MemoryParams::default());
        assert!(matches!(mem.local_jacobian(&point(&[0.0, 0.0]), 12), Err(Error::InsufficientSupport { .. })));
        for i in 0..4 {
            mem.insert(evolving_entry(&[3.0 + i as f64 * 0.01, 0.0], &[0.01, 0.0], &[0.1, 0.0])).unwrap();
        }
        // all support lies outside the 0.5 rad radius
        assert!(matches!(
            mem.local_jacobian(&point(&[0.0, 0.0]), 12),
            Err(Error::InsufficientSupport { found: 0, needed: 4 })
        ));
        assert!(mem.local_jacobian(&point(&[3.0, 0.0]), 12).is_ok());
    }

    #[test]
    fn single_entry_inverse_returns_its_params() {
        let mut mem = SensorimotorMemory::fixed(3, 2, MemoryParams::default());
        mem.insert(fixed_entry(&[0.2, 0.7, 0.4], &[1.0, 2.0])).unwrap();
        let est = mem.local_inverse_fixed_context(&point(&[30.0, -4.0]), 5, 4).unwrap();
        assert_abs_diff_eq!(est.params, point(&[0.2, 0.7, 0.4]), epsilon = 1e-15);
        assert!(est.fell_back);
    }

    #[test]
    fn inverse_prefers_the_tight_cluster() {
        // two parameter clusters mapping onto the same effect region; the
        // tight one has hand-computed spread 2 * 0.01 = 0.02, the loose one
        // 2 * 0.1 = 0.2
        let mut mem = SensorimotorMemory::fixed(2, 2, MemoryParams::default());
        let tight = [[0.2, 0.2], [0.21, 0.21], [0.19, 0.19]];
        let loose = [[0.8, 0.8], [0.9, 0.9], [0.7, 0.7]];
        for (i, t) in tight.iter().enumerate() {
            mem.insert(fixed_entry(t, &[1.0 + 0.01 * i as f64, 1.0])).unwrap();
        }
        for (i, t) in loose.iter().enumerate() {
            mem.insert(fixed_entry(t, &[1.0 - 0.01 * i as f64, 1.0])).unwrap();
        }
        assert_abs_diff_eq!(mem.param_spread(&[0, 1, 2]), 0.02, epsilon = 1e-12);
        assert_abs_diff_eq!(mem.param_spread(&[3, 4, 5]), 0.2, epsilon = 1e-12);
        let est = mem.local_inverse_fixed_context(&point(&[1.0, 1.0]), 6, 3).unwrap();
        let mut support = est.support.clone();
        support.sort();
        assert_eq!(support, vec![0, 1, 2]);
    }

    #[test]
    fn inverse_solves_linear_map() {
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 2.0, -1.0, 0.5, 0.0, 1.0, 3.0, -2.0]);
        let mut mem = SensorimotorMemory::fixed(4, 2, MemoryParams::default());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let theta = Point::from_fn(4, |_, _| rng.random::<f64>());
            let y = &a * &theta;
            mem.insert(SensorimotorEntry { context: theta, action: None, effect: y }).unwrap();
        }
        for _ in 0..20 {
            let target = Point::from_fn(4, |_, _| 0.3 + 0.4 * rng.random::<f64>());
            let goal = &a * &target;
            let est = mem.local_inverse_fixed_context(&goal, 10, 8).unwrap();
            assert!((&a * &est.params - &goal).norm() <= 1e-6);
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut mem = SensorimotorMemory::evolving(2, 2, MemoryParams::default());
        mem.insert(evolving_entry(&[0.1, 0.2], &[0.01, -0.3], &[0.5, 1.0 / 3.0])).unwrap();
        let mut buf = Vec::new();
        mem.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("c0,c1,a0,a1,e0,e1"));
        let back = SensorimotorMemory::read_csv(&buf[..], MemoryParams::default()).unwrap();
        assert_eq!(back.entries(), mem.entries());
        assert_eq!(back.kind(), ContextKind::Evolving);
    }
}
