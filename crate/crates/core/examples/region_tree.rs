//! Interest-driven goal selection on a synthetic competence landscape.
//!
//! Competence improves with practice in the left half of the unit square and
//! stays flat in the right half, so interest, and with it goal sampling,
//! concentrates on the left.

use sagg_riac::regions::{GoalMode, GoalOrigin, RegionParams, RegionTree};
use sagg_riac::rng::{stream, Stream};
use sagg_riac::Bounds;

fn main() -> sagg_riac::Result<()> {
    let mut goal_rng = stream(7, Stream::GoalSelection);
    let mut tree = RegionTree::new(Bounds::unit(2), RegionParams::default(), stream(7, Stream::RegionSplit))?;

    let mut practice = 0usize;
    let mut left = 0usize;
    let mut interest_driven = 0usize;
    for i in 0..3000 {
        let (goal, mode) = tree.select_goal(&mut goal_rng);
        let gamma = if goal[0] < 0.5 {
            practice += 1;
            -(-(practice as f64) / 400.0).exp()
        } else {
            -0.5
        };
        tree.update(&goal, gamma, GoalOrigin::SelfGenerated);
        if i >= 1000 && mode == GoalMode::Interest {
            interest_driven += 1;
            left += (goal[0] < 0.5) as usize;
        }
    }

    println!("{} leaves after {} updates", tree.leaves().len(), tree.updates());
    let mut leaves = tree.leaf_snapshot();
    leaves.sort_by(|a, b| b.interest.total_cmp(&a.interest));
    for leaf in leaves.iter().take(5) {
        println!(
            "interest {:.4} records {:>3} x [{:.2}, {:.2}] y [{:.2}, {:.2}]",
            leaf.interest, leaf.count, leaf.bounds.lo[0], leaf.bounds.hi[0], leaf.bounds.lo[1], leaf.bounds.hi[1]
        );
    }
    println!(
        "interest-driven goals in the improving half after warm-up: {:.1}%",
        100.0 * left as f64 / interest_driven.max(1) as f64
    );
    Ok(())
}
