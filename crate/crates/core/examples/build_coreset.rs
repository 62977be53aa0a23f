//! Build an exact pose coreset for a planar ten-marker rig.
//!
//! The rig has rank 2 in R^3, so the coreset holds at most
//! r(d-1)+1 = 5 weighted markers, yet its optimal rotation equals the
//! full-set optimum exactly.

use pose_coreset::bench::planar10;
use pose_coreset::geometry::{cost, kabsch_rotation, PointSet, RotationMatrix};
use pose_coreset::pose_coreset::pose_coreset;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = planar10();

    // Observed frame: rotated rig plus sensor noise.
    let r0 = RotationMatrix::random(3, &mut rng);
    let mut q = p.matrix() * r0.matrix();
    for v in q.iter_mut() {
        let g: f64 = StandardNormal.sample(&mut rng);
        *v += 0.01 * g;
    }
    let q = PointSet::new(q).expect("valid points");

    let coreset = pose_coreset(&p, &q).expect("coreset");
    println!(
        "rank {} in d=3  =>  sparsity bound r(d-1)+1 = {}",
        coreset.rank(),
        coreset.sparsity_bound()
    );
    println!("kept {} of {} markers:", coreset.sparsity(), p.n());
    for (index, weight) in coreset.weights().iter() {
        println!("  marker {index:2}  weight {weight:.6}");
    }

    let full = kabsch_rotation(&p, &q, None).expect("full solve");
    let tilde = coreset.solve_rotation(&p, &q).expect("coreset solve").rotation;
    let opt = cost(&p, &q, &full, None, None).expect("cost");
    let got = cost(&p, &q, &tilde, None, None).expect("cost");
    println!("full-set cost at its optimum:      {opt:.12}");
    println!("full-set cost at coreset rotation: {got:.12}");
    println!("excess: {:.3e}", got - opt);
}
