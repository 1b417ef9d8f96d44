//! Fixed-context reaching: one parameter vector per rollout, context reset
//! before each. The inverse proposal comes from the stored rollouts whose
//! parameters are most consistent; when it does not improve on the nearest
//! stored effect, a hill climb perturbs the best parameters in proportion to
//! the remaining distance.

use sagg_riac::competence::CompetenceConfig;
use sagg_riac::env::{ArmGeometry, EpisodicEnv, SynergyArm};
use sagg_riac::explore::{reach_fixed, reach_fixed_exploit, ReachingParams};
use sagg_riac::memory::{MemoryParams, SensorimotorMemory};
use sagg_riac::rng::{stream, Stream};
use sagg_riac::space::point;
use sagg_riac::Point;

fn main() -> sagg_riac::Result<()> {
    let env = SynergyArm::new(ArmGeometry::uniform(7, 50.0, std::f64::consts::FRAC_PI_2)?, Point::from_element(7, 0.55))?;
    let mut memory = SensorimotorMemory::fixed(7, 2, MemoryParams::default());
    let reaching = ReachingParams { explore_q: 10, ..ReachingParams::default() };
    let competence = CompetenceConfig::default();
    let mut rng = stream(5, Stream::Exploration);
    let rest = env.rest_effect();
    println!("rest effect ({:.1}, {:.1})", rest[0], rest[1]);

    let goals = [point(&[20.0, 30.0]), point(&[35.0, -20.0]), point(&[0.0, 40.0])];
    for attempt in 0..6 {
        for goal in &goals {
            let out = reach_fixed(&env, &mut memory, goal, &reaching, &competence, usize::MAX, &mut rng, &mut |_| {});
            if attempt % 2 == 1 {
                println!(
                    "attempt {attempt} goal ({:>4.0}, {:>4.0}): {:<7} {:>2} rollouts, error {:.2}",
                    goal[0],
                    goal[1],
                    out.terminated_by.as_str(),
                    out.used,
                    (&out.final_position - goal).norm()
                );
            }
        }
    }
    for goal in &goals {
        let y = reach_fixed_exploit(&env, &memory, goal, &reaching);
        println!("exploit ({:>4.0}, {:>4.0}): error {:.2}", goal[0], goal[1], (&y - goal).norm());
    }
    Ok(())
}
