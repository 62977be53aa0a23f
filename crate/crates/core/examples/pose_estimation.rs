//! Estimate the rigid motion between two matched marker sets.
//!
//! Builds a random rig, moves it by a known rotation + translation with a
//! little observation noise, then recovers the motion with the closed-form
//! solver and reports the errors.

use nalgebra::{DMatrix, DVector};
use pose_coreset::geometry::{
    apply_motion, cost, estimate_pose, geodesic_deg, PointSet, RigidMotion, RotationMatrix,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = PointSet::new(DMatrix::from_fn(25, 3, |_, _| StandardNormal.sample(&mut rng)))
        .expect("valid points");

    let truth = RigidMotion::new(
        RotationMatrix::random(3, &mut rng),
        DVector::from_vec(vec![0.4, -1.3, 2.0]),
    )
    .expect("valid motion");

    let mut q = apply_motion(&p, &truth).expect("same dims").into_matrix();
    for v in q.iter_mut() {
        let g: f64 = StandardNormal.sample(&mut rng);
        *v += 0.002 * g;
    }
    let q = PointSet::new(q).expect("valid points");

    // estimate_pose maps Q back onto P, i.e. the inverse of `truth`.
    let recovered = estimate_pose(&p, &q, None).expect("pose");
    let expected = truth.inverse();

    let rot_err = geodesic_deg(&recovered.rotation, &expected.rotation).expect("same dim");
    let trans_err = (&recovered.translation - &expected.translation).norm();
    let residual = cost(
        &p,
        &q,
        &recovered.rotation,
        Some(&recovered.translation),
        None,
    )
    .expect("cost");

    println!("planted rotation (inverse view):");
    for i in 0..3 {
        let row: Vec<String> = (0..3)
            .map(|j| format!("{:+.6}", expected.rotation.matrix()[(i, j)]))
            .collect();
        println!("  [{}]", row.join(", "));
    }
    println!("rotation error:    {rot_err:.6} deg");
    println!("translation error: {trans_err:.6}");
    println!("residual cost:     {residual:.3e}");
}
