//! ICP with unknown correspondence, on the full set and on a coreset.
//!
//! A planted small rotation with noise is recovered by multi-restart ICP.
//! Running the restarts on the coreset's five weighted markers instead of
//! the full two hundred gives the same fixed point far cheaper.

use nalgebra::DMatrix;
use pose_coreset::geometry::{centroid, geodesic_deg, PointSet, RotationMatrix};
use pose_coreset::matching::{icp_multi_restart, IcpParams};
use pose_coreset::pose_coreset::pose_coreset;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::time::Instant;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    // Well-separated markers: a jittered grid scaled up.
    let n = 200;
    let raw = PointSet::new(DMatrix::from_fn(n, 3, |i, j| {
        let cell = [(i % 6) as f64, ((i / 6) % 6) as f64, (i / 36) as f64][j];
        let g: f64 = StandardNormal.sample(&mut rng);
        cell * 2.0 + 0.15 * g
    }))
    .expect("valid points");
    let p = raw
        .translated(&centroid(&raw, None).expect("centroid"))
        .expect("centered");

    let r0 = RotationMatrix::plane_rotation(3, 0, 1, 10f64.to_radians());
    let mut q = p.matrix() * r0.matrix();
    for v in q.iter_mut() {
        let g: f64 = StandardNormal.sample(&mut rng);
        *v += 0.005 * g;
    }
    let q = PointSet::new(q).expect("valid points");

    let params = IcpParams::default();

    let t = Instant::now();
    let full = icp_multi_restart(&p, &q, 20, 7, params).expect("icp");
    let full_time = t.elapsed();

    let coreset = pose_coreset(&p, &q).expect("coreset");
    let (pt, qt, _w) = coreset.extract_weighted_pairs(&p, &q).expect("extract");
    let t = Instant::now();
    let small = icp_multi_restart(&pt, &qt, 20, 7, params).expect("icp");
    let small_time = t.elapsed();

    let planted = r0.transpose(); // estimate maps Q back onto P
    let full_err = geodesic_deg(&full.best.motion.rotation, &planted).expect("dim");
    let small_err = geodesic_deg(&small.best.motion.rotation, &planted).expect("dim");

    println!("full set : {n} markers, 20 restarts, {full_time:?}");
    println!("   rotation error {full_err:.4} deg, iterations {}, converged {}",
        full.best.iterations, full.best.converged);
    println!("coreset  : {} markers, 20 restarts, {small_time:?}", pt.n());
    println!("   rotation error {small_err:.4} deg, iterations {}, converged {}",
        small.best.iterations, small.best.converged);
    println!(
        "agreement between the two fixed points: {:.4} deg",
        geodesic_deg(&full.best.motion.rotation, &small.best.motion.rotation).expect("dim")
    );
}
