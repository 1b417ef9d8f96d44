//! Competence of a reaching attempt.

use serde::{Deserialize, Serialize};

use crate::space::{scaled_distance, Point};
use crate::{Error, Result};

pub const DEFAULT_EPS_SIM: f64 = -0.05;
pub const DEFAULT_EPS_C: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompetenceConfig {
    /// Competences above this (negative) threshold count as reached.
    #[serde(default = "default_eps_sim")]
    pub eps_sim: f64,
    /// Goals closer than this to the start get competence 0.
    #[serde(default = "default_eps_c")]
    pub eps_c: f64,
    /// Per-dimension factors applied before measuring distances. Empty means
    /// all ones.
    #[serde(default)]
    pub dim_scales: Vec<f64>,
}

fn default_eps_sim() -> f64 {
    DEFAULT_EPS_SIM
}
fn default_eps_c() -> f64 {
    DEFAULT_EPS_C
}

impl Default for CompetenceConfig {
    fn default() -> Self {
        CompetenceConfig { eps_sim: DEFAULT_EPS_SIM, eps_c: DEFAULT_EPS_C, dim_scales: Vec::new() }
    }
}

impl CompetenceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_sim < 0.0) {
            return Err(Error::Config(format!("eps_sim must be negative, got {}", self.eps_sim)));
        }
        if !(self.eps_c > 0.0) {
            return Err(Error::Config(format!("eps_c must be positive, got {}", self.eps_c)));
        }
        if self.dim_scales.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::Config(format!("dim_scales must be positive: {:?}", self.dim_scales)));
        }
        Ok(())
    }

    pub fn distance(&self, a: &Point, b: &Point) -> f64 {
        if self.dim_scales.is_empty() {
            (a - b).norm()
        } else {
            scaled_distance(a, b, &self.dim_scales)
        }
    }
}

/// `-D(goal, reached) / D(start, goal)`, 0 when the goal is within `eps_c` of
/// the start and -1 when the attempt ended farther away than it began.
pub fn competence_normalized(goal: &Point, reached: &Point, start: &Point, cfg: &CompetenceConfig) -> f64 {
    let to_goal = cfg.distance(start, goal);
    if to_goal < cfg.eps_c {
        return 0.0;
    }
    let miss = cfg.distance(goal, reached);
    if miss > to_goal {
        -1.0
    } else {
        -miss / to_goal
    }
}

pub fn clip_to_gamma(c: f64, cfg: &CompetenceConfig) -> Result<f64> {
    if c > 0.0 {
        return Err(Error::PositiveCompetence(c));
    }
    Ok(if c <= cfg.eps_sim { c } else { 0.0 })
}

/// Clipped competence of an attempt.
pub fn gamma(goal: &Point, reached: &Point, start: &Point, cfg: &CompetenceConfig) -> f64 {
    let c = competence_normalized(goal, reached, start, cfg);
    if c <= cfg.eps_sim {
        c
    } else {
        0.0
    }
}

/// Competence credited to points reached on the way to some other goal.
pub fn max_competence() -> f64 {
    0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::point;
    use proptest::prelude::*;

    fn cfg() -> CompetenceConfig {
        CompetenceConfig { eps_sim: -0.01, ..Default::default() }
    }

    #[test]
    fn direct_evaluation() {
        let c = competence_normalized(&point(&[10.0, 0.0]), &point(&[5.0, 0.0]), &point(&[0.0, 0.0]), &cfg());
        assert_eq!(c, -0.5);
    }

    #[test]
    fn exact_reach_is_zero() {
        let g = point(&[10.0, 0.0]);
        let c = competence_normalized(&g, &g, &point(&[0.0, 0.0]), &cfg());
        assert_eq!(c, 0.0);
        assert_eq!(clip_to_gamma(c, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn moved_away_and_too_close_clamps() {
        let start = point(&[0.0, 0.0]);
        assert_eq!(competence_normalized(&point(&[10.0, 0.0]), &point(&[25.0, 0.0]), &start, &cfg()), -1.0);
        assert_eq!(competence_normalized(&point(&[1e-4, 0.0]), &point(&[9.0, 0.0]), &start, &cfg()), 0.0);
    }

    #[test]
    fn clipping_rule() {
        let c = cfg();
        assert_eq!(clip_to_gamma(-0.5, &c).unwrap(), -0.5);
        assert_eq!(clip_to_gamma(-0.001, &c).unwrap(), 0.0);
        assert_eq!(clip_to_gamma(c.eps_sim, &c).unwrap(), c.eps_sim);
        assert!(matches!(clip_to_gamma(0.1, &c), Err(Error::PositiveCompetence(_))));
    }

    #[test]
    fn max_competence_is_zero() {
        assert_eq!(max_competence(), 0.0);
    }

    #[test]
    fn dim_scales_weight_distances() {
        let c = CompetenceConfig { dim_scales: vec![1.0, 0.0], ..cfg() };
        assert!(c.validate().is_err());
        let c = CompetenceConfig { dim_scales: vec![1.0, 0.5], ..cfg() };
        let v = competence_normalized(&point(&[0.0, 10.0]), &point(&[0.0, 5.0]), &point(&[0.0, 0.0]), &c);
        assert_eq!(v, -0.5);
        let v = competence_normalized(&point(&[10.0, 0.0]), &point(&[10.0, 5.0]), &point(&[0.0, 0.0]), &c);
        assert_eq!(v, -0.25);
    }

    fn p2() -> impl Strategy<Value = Point> {
        (-100.0..100.0f64, -100.0..100.0f64).prop_map(|(a, b)| point(&[a, b]))
    }

    proptest! {
        #[test]
        fn gamma_in_unit_range(g in p2(), f in p2(), s in p2()) {
            let v = gamma(&g, &f, &s, &cfg());
            prop_assert!((-1.0..=0.0).contains(&v));
        }

        #[test]
        fn scale_invariance(g in p2(), f in p2(), s in p2(), k in 0.1..10.0f64) {
            let c = cfg();
            let scaled = CompetenceConfig { eps_c: c.eps_c * k, ..c.clone() };
            let a = competence_normalized(&g, &f, &s, &c);
            let b = competence_normalized(&(&g * k), &(&f * k), &(&s * k), &scaled);
            prop_assert!((a - b).abs() < 1e-9);
        }

        #[test]
        fn non_increasing_in_miss(s in p2(), g in p2(), dir in p2(), d1 in 0.0..50.0f64, d2 in 0.0..50.0f64) {
            prop_assume!((&g - &s).norm() >= 1.0 && dir.norm() > 1e-6);
            let u = &dir / dir.norm();
            let (near, far) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            let c = cfg();
            let a = competence_normalized(&g, &(&g + &u * near), &s, &c);
            let b = competence_normalized(&g, &(&g + &u * far), &s, &c);
            prop_assert!(b <= a);
        }
    }
}
