//! Sensorimotor memory and local pseudo-inverse models.
//!
//! A 15-DOF arm babbles random micro-actions around its rest pose; the local
//! Jacobian fitted from the stored exemplars is compared with a numerical one.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sagg_riac::env::{forward_kinematics, ArmEnv, ArmGeometry, MicroActionEnv};
use sagg_riac::memory::{pseudo_inverse, MemoryParams, SensorimotorEntry, SensorimotorMemory};
use sagg_riac::Point;

fn numerical_jacobian(geometry: &ArmGeometry, alpha: &Point) -> DMatrix<f64> {
    let h = 1e-6;
    let y0 = forward_kinematics(geometry, alpha);
    DMatrix::from_fn(2, alpha.len(), |i, j| {
        let mut a = alpha.clone();
        a[j] += h;
        (forward_kinematics(geometry, &a)[i] - y0[i]) / h
    })
}

fn main() -> sagg_riac::Result<()> {
    let n = 15;
    let geometry = ArmGeometry::uniform(n, 50.0, std::f64::consts::PI)?;
    let mut arm = ArmEnv::new(geometry.clone(), Point::from_element(n, 0.1), 0.2)?;
    let params = MemoryParams { jacobian_k: 30, ..MemoryParams::default() };
    let mut memory = SensorimotorMemory::evolving(n, 2, params);
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    for i in 0..400 {
        if i % 20 == 0 {
            arm.reset();
        }
        let delta = Point::from_fn(n, |_, _| rng.random_range(-0.05..=0.05));
        let step = arm.step(&delta);
        memory.insert(SensorimotorEntry {
            context: step.alpha_before,
            action: Some(step.delta_alpha),
            effect: &step.y_after - &step.y_before,
        })?;
    }
    println!("memory holds {} exemplars", memory.len());

    let alpha = arm.rest().clone();
    let model = memory.local_jacobian(&alpha, 30)?;
    let truth = numerical_jacobian(&geometry, &alpha);
    let rel = (&model.jacobian - &truth).norm() / truth.norm();
    println!("local Jacobian from {} neighbours, relative error {rel:.3}", model.support_size);

    let j = &model.jacobian;
    let jp = pseudo_inverse(j);
    println!("|J J+ J - J| = {:.2e}", (j * &jp * j - j).norm());
    println!("|J+ J J+ - J+| = {:.2e}", (&jp * j * &jp - &jp).norm());

    // One pseudo-inverse step toward a point 2 units above the rest position.
    let dy = Point::from_column_slice(&[0.0, 2.0]);
    let dalpha = &model.pseudo_inverse * &dy;
    let moved = forward_kinematics(&geometry, &(&alpha + &dalpha)) - forward_kinematics(&geometry, &alpha);
    println!("commanded dy = (0, 2), observed dy = ({:.3}, {:.3})", moved[0], moved[1]);
    Ok(())
}
