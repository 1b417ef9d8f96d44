//! Forward kinematics and micro-action stepping of a planar arm.
//!
//! Run with `cargo run --example arm_kinematics`.

use sagg_riac::env::{forward_kinematics, ArmEnv, ArmGeometry, MicroActionEnv, Reachability};
use sagg_riac::space::point;

fn main() -> sagg_riac::Result<()> {
    let geometry = ArmGeometry::uniform(3, 30.0, std::f64::consts::PI)?;
    println!("links {:?}, reach radius {}", geometry.link_lengths(), geometry.total_length());

    for alpha in [[0.0, 0.0, 0.0], [std::f64::consts::FRAC_PI_2, 0.0, 0.0], [0.5, -0.5, 0.5]] {
        let y = forward_kinematics(&geometry, &point(&alpha));
        println!("alpha {alpha:?} -> y = ({:.3}, {:.3})", y[0], y[1]);
    }

    let mut arm = ArmEnv::new(geometry, point(&[0.1, 0.1, 0.1]), 0.2)?;
    println!("rest position ({:.3}, {:.3})", arm.position()[0], arm.position()[1]);
    // Oversized increments are scaled down to max_step.
    for _ in 0..5 {
        let step = arm.step(&point(&[0.3, 0.0, -0.3]));
        let dy = &step.y_after - &step.y_before;
        println!(
            "applied |d_alpha| = {:.3}, dy = ({:+.3}, {:+.3})",
            step.delta_alpha.norm(),
            dy[0],
            dy[1]
        );
    }
    let reach = arm.reach();
    println!("end effector reachable: {}", reach.is_reachable(arm.position()));
    arm.reset();
    println!("after reset ({:.3}, {:.3})", arm.position()[0], arm.position()[1]);
    Ok(())
}
