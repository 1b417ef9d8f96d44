//! Property tests for the structural invariants of each module.

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sagg_riac::competence::{gamma, CompetenceConfig};
use sagg_riac::env::{
    episodic_rollout, forward_kinematics, step_arm, ArmEnv, ArmGeometry, ArmState, EpisodicEnv, MicroAction,
    MicroActionEnv, SynergyArm, SynergyParams,
};
use sagg_riac::explore::{reach_evolving, reach_fixed, ReachingParams, Termination};
use sagg_riac::memory::{pseudo_inverse, KdTree, MemoryParams, SensorimotorEntry, SensorimotorMemory};
use sagg_riac::regions::{interest_of, GoalOrigin, RegionParams, RegionTree};
use sagg_riac::rng::{stream, Stream};
use sagg_riac::space::point;
use sagg_riac::{Bounds, Point};

fn vec_in(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = Point> {
    prop::collection::vec(lo..hi, n).prop_map(Point::from_vec)
}

fn geometry(n: usize) -> ArmGeometry {
    ArmGeometry::uniform(n, 50.0, std::f64::consts::PI).unwrap()
}

/// Batch interest straight from the definition: last `zeta` values, older
/// half minus newer half, over `zeta`.
fn batch_interest(gammas: &[f64], zeta: usize) -> f64 {
    let w = gammas.len().min(zeta) / 2 * 2;
    if w < 2 {
        return 0.0;
    }
    let tail = &gammas[gammas.len() - w..];
    let mut older = 0.0;
    for g in &tail[..w / 2] {
        older += g;
    }
    let mut newer = 0.0;
    for g in &tail[w / 2..] {
        newer += g;
    }
    (older - newer).abs() / zeta as f64
}

fn small_tree(seed: u64, g_max: usize) -> RegionTree {
    let params = RegionParams { g_max, zeta: 8, ..RegionParams::default() };
    RegionTree::new(Bounds::unit(2), params, stream(seed, Stream::RegionSplit)).unwrap()
}

proptest! {
    #[test]
    fn fk_stays_in_disk_and_is_lipschitz(alpha in vec_in(7, -3.0, 3.0), delta in vec_in(7, -0.1, 0.1)) {
        let g = geometry(7);
        let y = forward_kinematics(&g, &alpha);
        prop_assert!(y.norm() <= 50.0 + 1e-9);
        let moved = forward_kinematics(&g, &(&alpha + &delta));
        prop_assert!((moved - y).norm() <= 50.0 * delta.iter().map(|d| d.abs()).sum::<f64>() + 1e-9);
    }

    #[test]
    fn repeated_steps_match_one_combined_step(alpha in vec_in(5, -1.0, 1.0), delta in vec_in(5, -0.02, 0.02), k in 1usize..6) {
        let g = geometry(5);
        let mut state = ArmState::new(alpha.clone());
        for _ in 0..k {
            state = step_arm(&g, &state, &MicroAction::new(delta.clone(), 1.0).unwrap()).0;
        }
        let once = step_arm(&g, &ArmState::new(alpha), &MicroAction::new(&delta * k as f64, 1.0).unwrap()).0;
        prop_assert!((state.alpha - once.alpha).norm() < 1e-12);
    }

    #[test]
    fn rollout_is_fk_of_rescaled_params(theta in vec_in(6, 0.0, 1.0)) {
        let g = geometry(6);
        let env = SynergyArm::new(g.clone(), Point::from_element(6, 0.5)).unwrap();
        let direct = forward_kinematics(&g, &g.rescale(&theta));
        prop_assert_eq!(env.rollout(&theta), direct.clone());
        prop_assert_eq!(episodic_rollout(&g, &SynergyParams::new(theta).unwrap()), direct);
    }

    #[test]
    fn pseudo_inverse_identities(rows in 1usize..8, cols in 1usize..16, rank in 1usize..8, seed in any::<u64>()) {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = rank.min(rows).min(cols);
        let a = DMatrix::<f64>::from_fn(rows, r, |_, _| StandardNormal.sample(&mut rng));
        let b = DMatrix::<f64>::from_fn(r, cols, |_, _| StandardNormal.sample(&mut rng));
        let j: DMatrix<f64> = a * b;
        let p = pseudo_inverse(&j);
        prop_assert!((&j * &p * &j - &j).norm() < 1e-8);
        prop_assert!((&p * &j * &p - &p).norm() < 1e-8);
    }

    #[test]
    fn kd_tree_matches_linear_scan(points in prop::collection::vec(vec_in(3, -5.0, 5.0), 1..80), q in vec_in(3, -6.0, 6.0), k in 1usize..6) {
        let mut tree = KdTree::new(3);
        for p in &points {
            tree.insert(p.as_slice());
        }
        let got: Vec<f64> = tree.nearest(q.as_slice(), k, 0.0).iter().map(|(_, d)| *d).collect();
        let mut brute: Vec<f64> = points.iter().map(|p| (p - &q).norm()).collect();
        brute.sort_by(f64::total_cmp);
        brute.truncate(k);
        prop_assert_eq!(got.len(), brute.len());
        for (a, b) in got.iter().zip(&brute) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn inserted_entry_is_its_own_nearest(points in prop::collection::vec(vec_in(2, 0.0, 1.0), 1..40), pick in any::<prop::sample::Index>()) {
        let mut memory = SensorimotorMemory::fixed(2, 2, MemoryParams::default());
        for p in &points {
            memory.insert(SensorimotorEntry { context: p.clone(), action: None, effect: p * 3.0 }).unwrap();
        }
        let i = pick.index(points.len());
        let (_, d) = memory.nearest(&(&points[i] * 3.0), 1).unwrap()[0];
        prop_assert_eq!(d, 0.0);
    }

    #[test]
    fn local_jacobian_ignores_insertion_order(seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let truth = DMatrix::from_fn(2, 4, |_, _| rng.random_range(-1.0..1.0));
        let entries: Vec<SensorimotorEntry> = (0..30)
            .map(|_| {
                let context = Point::from_fn(4, |_, _| rng.random_range(-0.1..0.1));
                let action = Point::from_fn(4, |_, _| rng.random_range(-0.05..0.05));
                SensorimotorEntry { context, effect: &truth * &action, action: Some(action) }
            })
            .collect();
        let mut shuffled = entries.clone();
        shuffled.shuffle(&mut rng);
        let build = |list: &[SensorimotorEntry]| {
            let mut m = SensorimotorMemory::evolving(4, 2, MemoryParams { jacobian_k: 30, ..MemoryParams::default() });
            for e in list {
                m.insert(e.clone()).unwrap();
            }
            m.local_jacobian(&Point::zeros(4), 30).unwrap().jacobian
        };
        prop_assert!((build(&entries) - build(&shuffled)).norm() < 1e-9);
    }

    #[test]
    fn competence_is_monotone_in_final_distance(goal in vec_in(2, -10.0, 10.0), dir in vec_in(2, -1.0, 1.0), d1 in 0.0f64..30.0, d2 in 0.0f64..30.0) {
        prop_assume!(dir.norm() > 1e-3 && goal.norm() > 1e-2);
        let cfg = CompetenceConfig::default();
        let start = point(&[0.0, 0.0]);
        let u = dir.normalize();
        let (near, far) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let g_near = gamma(&goal, &(&goal + &u * near), &start, &cfg);
        let g_far = gamma(&goal, &(&goal + &u * far), &start, &cfg);
        prop_assert!(g_far <= g_near);
        prop_assert!((-1.0..=0.0).contains(&g_far));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn region_tree_partition_conservation_and_interest(
        seed in any::<u64>(),
        updates in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, -1.0f64..=0.0), 1..400),
    ) {
        let mut tree = small_tree(seed, 10);
        for (x, y, g) in &updates {
            let report = tree.update(&point(&[*x, *y]), *g, GoalOrigin::SelfGenerated);
            if let Some(choice) = report.split {
                for c in &choice.candidates {
                    prop_assert!(choice.chosen.qual >= c.qual);
                }
            }
        }
        let leaves = tree.leaves().to_vec();
        let area: f64 = leaves.iter().map(|&l| tree.leaf_bounds(l).volume()).sum();
        prop_assert!((area - 1.0).abs() < 1e-12);
        for (i, &a) in leaves.iter().enumerate() {
            for &b in &leaves[i + 1..] {
                prop_assert!(tree.leaf_bounds(a).overlap(tree.leaf_bounds(b)) < 1e-15);
            }
        }
        let records: usize = leaves.iter().map(|&l| tree.leaf_records(l).len()).sum();
        prop_assert_eq!(records, updates.len());
        for &l in &leaves {
            let gammas: Vec<f64> = tree.leaf_records(l).iter().map(|r| r.gamma).collect();
            prop_assert!(tree.interest(l) >= 0.0);
            prop_assert_eq!(tree.interest(l), batch_interest(&gammas, 8));
            prop_assert_eq!(interest_of(&gammas, 8), batch_interest(&gammas, 8));
            for r in tree.leaf_records(l) {
                prop_assert!(tree.leaf_bounds(l).contains(&r.position));
            }
        }
    }

    #[test]
    fn region_probabilities_form_a_distribution(
        seed in any::<u64>(),
        updates in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, -1.0f64..=0.0), 30..300),
    ) {
        let mut tree = small_tree(seed, 10);
        for (x, y, g) in &updates {
            tree.update(&point(&[*x, *y]), *g, GoalOrigin::SelfGenerated);
        }
        let probs = tree.region_probabilities();
        prop_assert!(probs.iter().all(|(_, p)| *p >= 0.0));
        prop_assert!((probs.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs() < 1e-12);
        let top_p = probs.iter().map(|(_, p)| *p).fold(f64::MIN, f64::max);
        let top_interest = tree.leaves().iter().map(|&l| tree.interest(l)).fold(f64::MIN, f64::max);
        for (leaf, p) in &probs {
            if *p == top_p {
                prop_assert_eq!(tree.interest(*leaf), top_interest);
            }
        }
    }

    #[test]
    fn evolving_reach_respects_budget_and_stores_every_action(seed in any::<u64>(), gx in -60.0f64..60.0, gy in -60.0f64..60.0) {
        let n = 4;
        let mut env = ArmEnv::new(geometry(n), Point::from_element(n, 0.3), 0.2).unwrap();
        let mut memory = SensorimotorMemory::evolving(n, 2, MemoryParams::default());
        let params = ReachingParams { blocking_w: Some(3), ..ReachingParams::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let goal = point(&[gx, gy]);
        let start = env.position().clone();
        let out = reach_evolving(&mut env, &mut memory, &goal, &params, &CompetenceConfig::default(), usize::MAX, &mut rng, &mut |_| {});
        prop_assert_eq!(memory.len(), out.used);
        prop_assert!(out.used <= params.budget_for((&goal - &start).norm()));
        if out.terminated_by == Termination::Blocked {
            prop_assert!(out.exploration_phases >= 3);
        }
        prop_assert_eq!(out.gamma, gamma(&goal, &out.final_position, &start, &CompetenceConfig::default()));
    }

    #[test]
    fn fixed_reach_never_ends_worse_than_its_first_rollout(seed in any::<u64>(), gx in -40.0f64..40.0, gy in -40.0f64..40.0) {
        let env = SynergyArm::new(geometry(5), Point::from_element(5, 0.55)).unwrap();
        let mut memory = SensorimotorMemory::fixed(5, 2, MemoryParams::default());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = ReachingParams { explore_q: 10, ..ReachingParams::default() };
        let cfg = CompetenceConfig::default();
        for _ in 0..3 {
            let goal = point(&[gx, gy]);
            let mut seen = Vec::new();
            let before = memory.len();
            let out = reach_fixed(&env, &mut memory, &goal, &params, &cfg, usize::MAX, &mut rng, &mut |y| seen.push(y.clone()));
            prop_assert_eq!(memory.len() - before, out.used);
            prop_assert!(out.used <= params.explore_q + 1);
            let first = (&seen[0] - &goal).norm();
            prop_assert!((&out.final_position - &goal).norm() <= first + 1e-12);
        }
    }
}
