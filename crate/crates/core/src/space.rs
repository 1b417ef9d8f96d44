//! Points and axis-aligned boxes shared by every module.

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A point in a task, context or parameter space.
pub type Point = DVector<f64>;

pub fn point(xs: &[f64]) -> Point {
    DVector::from_column_slice(xs)
}

pub fn distance(a: &Point, b: &Point) -> f64 {
    (a - b).norm()
}

/// Euclidean distance after componentwise multiplication by `scales`.
pub fn scaled_distance(a: &Point, b: &Point, scales: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .zip(scales)
        .map(|((x, y), s)| ((x - y) * s).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Bounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), actual: hi.len() });
        }
        if lo.is_empty() {
            return Err(Error::Config("bounds must have at least one dimension".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::Config(format!("degenerate bounds {lo:?}..{hi:?}")));
        }
        Ok(Bounds { lo, hi })
    }

    pub fn unit(dim: usize) -> Self {
        Bounds { lo: vec![0.0; dim], hi: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn width(&self, j: usize) -> f64 {
        self.hi[j] - self.lo[j]
    }

    pub fn diagonal(&self) -> f64 {
        (0..self.dim()).map(|j| self.width(j).powi(2)).sum::<f64>().sqrt()
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|j| self.width(j)).product()
    }

    pub fn center(&self) -> Point {
        Point::from_iterator(self.dim(), (0..self.dim()).map(|j| 0.5 * (self.lo[j] + self.hi[j])))
    }

    /// Closed-box membership.
    pub fn contains(&self, p: &Point) -> bool {
        p.len() == self.dim() && p.iter().enumerate().all(|(j, x)| *x >= self.lo[j] && *x <= self.hi[j])
    }

    pub fn clamp(&self, p: &Point) -> Point {
        Point::from_iterator(self.dim(), p.iter().enumerate().map(|(j, x)| x.clamp(self.lo[j], self.hi[j])))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point::from_iterator(
            self.dim(),
            (0..self.dim()).map(|j| self.lo[j] + rng.random::<f64>() * self.width(j)),
        )
    }

    /// Splits at `value` along `dim` into the lower and upper halves.
    pub fn split(&self, dim: usize, value: f64) -> (Bounds, Bounds) {
        let mut left = self.clone();
        let mut right = self.clone();
        left.hi[dim] = value;
        right.lo[dim] = value;
        (left, right)
    }

    /// Volume of the intersection with another box (zero when disjoint).
    pub fn overlap(&self, other: &Bounds) -> f64 {
        (0..self.dim())
            .map(|j| (self.hi[j].min(other.hi[j]) - self.lo[j].max(other.lo[j])).max(0.0))
            .product()
    }

    pub fn intersection(&self, other: &Bounds) -> Option<Bounds> {
        let lo: Vec<f64> = (0..self.dim()).map(|j| self.lo[j].max(other.lo[j])).collect();
        let hi: Vec<f64> = (0..self.dim()).map(|j| self.hi[j].min(other.hi[j])).collect();
        Bounds::new(lo, hi).ok()
    }

    /// Unit-free scales mapping each dimension onto [0, 1].
    pub fn unit_scales(&self) -> Vec<f64> {
        (0..self.dim()).map(|j| 1.0 / self.width(j)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_halves_share_the_cut() {
        let b = Bounds::new(vec![0.0, -1.0], vec![2.0, 1.0]).unwrap();
        let (l, r) = b.split(0, 0.5);
        assert_eq!(l.hi[0], 0.5);
        assert_eq!(r.lo[0], 0.5);
        assert_eq!(l.overlap(&r), 0.0);
        assert!((l.volume() + r.volume() - b.volume()).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_boxes() {
        assert!(Bounds::new(vec![1.0], vec![1.0]).is_err());
        assert!(Bounds::new(vec![0.0, 0.0], vec![1.0]).is_err());
    }
}
