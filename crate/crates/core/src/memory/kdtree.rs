//! Incremental bucket kd-tree.
//!
//! Points are appended and never removed. A leaf bucket that overflows is
//! split at the median of its widest coordinate, so the tree stays balanced
//! locally even when points arrive along a trajectory.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const BUCKET: usize = 24;

#[derive(Debug, Clone)]
enum Node {
    Leaf(Vec<u32>),
    Split { dim: usize, value: f64, left: usize, right: usize },
}

#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    coords: Vec<f64>,
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    dist2: f64,
    index: u32,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2.total_cmp(&other.dist2).then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl KdTree {
    pub fn new(dim: usize) -> Self {
        KdTree { dim, coords: Vec::new(), nodes: vec![Node::Leaf(Vec::new())] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, index: usize) -> &[f64] {
        &self.coords[index * self.dim..(index + 1) * self.dim]
    }

    /// Appends a point and returns its index.
    pub fn insert(&mut self, p: &[f64]) -> usize {
        assert_eq!(p.len(), self.dim, "kd-tree dimension mismatch");
        let index = self.len();
        self.coords.extend_from_slice(p);
        let mut node = 0;
        loop {
            match &mut self.nodes[node] {
                Node::Split { dim, value, left, right } => {
                    node = if p[*dim] < *value { *left } else { *right };
                }
                Node::Leaf(items) => {
                    items.push(index as u32);
                    if items.len() > BUCKET {
                        self.split_leaf(node);
                    }
                    return index;
                }
            }
        }
    }

    fn split_leaf(&mut self, node: usize) {
        let items = match &self.nodes[node] {
            Node::Leaf(items) => items.clone(),
            Node::Split { .. } => unreachable!(),
        };
        let (dim, spread) = (0..self.dim)
            .map(|d| {
                let (lo, hi) = items.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                    let x = self.coords[i as usize * self.dim + d];
                    (lo.min(x), hi.max(x))
                });
                (d, hi - lo)
            })
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(spread > 0.0) {
            // identical points stay in one oversized bucket
            return;
        }
        let mut values: Vec<f64> = items.iter().map(|&i| self.coords[i as usize * self.dim + dim]).collect();
        values.sort_by(f64::total_cmp);
        let mut value = values[values.len() / 2];
        if value == values[0] {
            value = *values.iter().find(|v| **v > values[0]).expect("positive spread");
        }
        let (l, r): (Vec<u32>, Vec<u32>) =
            items.iter().partition(|&&i| self.coords[i as usize * self.dim + dim] < value);
        let left = self.nodes.len();
        self.nodes.push(Node::Leaf(l));
        self.nodes.push(Node::Leaf(r));
        self.nodes[node] = Node::Split { dim, value, left, right: left + 1 };
    }

    fn dist2(&self, index: u32, q: &[f64]) -> f64 {
        self.point(index as usize).iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    /// The `k` nearest points as `(index, distance)`, ascending by distance
    /// then index. With `eps > 0` the i-th returned distance is at most
    /// `(1 + eps)` times the true i-th distance.
    pub fn nearest(&self, q: &[f64], k: usize, eps: f64) -> Vec<(usize, f64)> {
        assert_eq!(q.len(), self.dim, "kd-tree dimension mismatch");
        if k == 0 || self.is_empty() {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        let shrink = 1.0 / ((1.0 + eps) * (1.0 + eps));
        self.search(0, q, k, shrink, &mut heap);
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        out.into_iter().map(|c| (c.index as usize, c.dist2.sqrt())).collect()
    }

    fn search(&self, node: usize, q: &[f64], k: usize, shrink: f64, heap: &mut BinaryHeap<Candidate>) {
        match &self.nodes[node] {
            Node::Leaf(items) => {
                for &i in items {
                    let c = Candidate { dist2: self.dist2(i, q), index: i };
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().expect("full heap") {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Node::Split { dim, value, left, right } => {
                let diff = q[*dim] - value;
                let (near, far) = if diff < 0.0 { (*left, *right) } else { (*right, *left) };
                self.search(near, q, k, shrink, heap);
                let visit_far = heap.len() < k || diff * diff <= heap.peek().expect("full heap").dist2 * shrink;
                if visit_far {
                    self.search(far, q, k, shrink, heap);
                }
            }
        }
    }
}
