//! Goal-directed reaching with local exploration on a 15-DOF arm.
//!
//! Each goal is approached with pseudo-inverse steps; when the local model
//! mispredicts, a short burst of random micro-actions refreshes it. The same
//! goals are then re-attempted without exploration.

use sagg_riac::competence::CompetenceConfig;
use sagg_riac::env::{ArmEnv, ArmGeometry, MicroActionEnv};
use sagg_riac::explore::{make_subgoals, reach_evolving, reach_exploit, ReachingParams};
use sagg_riac::memory::{MemoryParams, SensorimotorMemory};
use sagg_riac::rng::{stream, Stream};
use sagg_riac::space::point;
use sagg_riac::Point;

fn main() -> sagg_riac::Result<()> {
    let n = 15;
    let mut arm = ArmEnv::new(ArmGeometry::uniform(n, 50.0, std::f64::consts::PI)?, Point::from_element(n, 0.1), 0.2)?;
    let mut memory = SensorimotorMemory::evolving(n, 2, MemoryParams { jacobian_k: 30, ..MemoryParams::default() });
    let reaching = ReachingParams::default();
    let competence = CompetenceConfig::default();
    let mut rng = stream(11, Stream::Exploration);

    let goals = [point(&[30.0, 20.0]), point(&[10.0, -35.0]), point(&[-20.0, 25.0]), point(&[60.0, 0.0])];
    for round in 0..3 {
        for goal in &goals {
            arm.reset();
            // Straight-line subgoals keep each segment short.
            for sub in make_subgoals(arm.position(), goal, 5) {
                let out = reach_evolving(&mut arm, &mut memory, &sub, &reaching, &competence, usize::MAX, &mut rng, &mut |_| {});
                if sub == *goal {
                    println!(
                        "round {round} goal ({:>5.1}, {:>5.1}): {:<7} after {:>3} actions, {} exploration phases, error {:.2}",
                        goal[0],
                        goal[1],
                        out.terminated_by.as_str(),
                        out.used,
                        out.exploration_phases,
                        (&out.final_position - goal).norm()
                    );
                }
            }
        }
    }
    println!("memory: {} exemplars", memory.len());

    for goal in &goals {
        arm.reset();
        let out = reach_exploit(&mut arm, &memory, goal, &reaching, &competence);
        println!("exploit ({:>5.1}, {:>5.1}): error {:.2}", goal[0], goal[1], (&out.final_position - goal).norm());
    }
    Ok(())
}
