//! The coreset keeps working after the observed set moves.
//!
//! A coreset built from one (centered) frame stays exact when both sets are
//! rotated and shifted arbitrarily: the residual against the translation-
//! optimal full-set cost stays at floating-point level across random
//! transforms.

use nalgebra::{DMatrix, DVector};
use pose_coreset::geometry::{centroid, PointSet, RotationMatrix};
use pose_coreset::pose_coreset::{pose_coreset, validate_coreset};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let raw = PointSet::new(DMatrix::from_fn(60, 3, |_, _| StandardNormal.sample(&mut rng)))
        .expect("valid points");
    let p = raw
        .translated(&centroid(&raw, None).expect("centroid"))
        .expect("centered");

    let r0 = RotationMatrix::random(3, &mut rng);
    let mut q = p.matrix() * r0.matrix();
    for v in q.iter_mut() {
        let g: f64 = StandardNormal.sample(&mut rng);
        *v += 0.01 * g;
    }
    let q = PointSet::new(q).expect("valid points");
    let q = q
        .translated(&centroid(&q, None).expect("centroid"))
        .expect("centered");

    let coreset = pose_coreset(&p, &q).expect("coreset");
    println!(
        "coreset of {} markers (bound {})",
        coreset.sparsity(),
        coreset.sparsity_bound()
    );

    let mut worst: f64 = 0.0;
    for trial in 0..25 {
        let a = RotationMatrix::random(3, &mut rng);
        let b = RotationMatrix::random(3, &mut rng);
        let mu = DVector::from_fn(3, |_, _| {
            let g: f64 = StandardNormal.sample(&mut rng);
            g * 5.0
        });
        let nu = DVector::from_fn(3, |_, _| {
            let g: f64 = StandardNormal.sample(&mut rng);
            g * 5.0
        });
        let residual = validate_coreset(&coreset, &p, &q, &a, &b, &mu, &nu).expect("residual");
        worst = worst.max(residual.abs());
        if trial < 5 {
            println!("  transform {trial}: residual {residual:+.3e}");
        }
    }
    println!("worst |residual| over 25 random (A, B, mu, nu): {worst:.3e}");
}
