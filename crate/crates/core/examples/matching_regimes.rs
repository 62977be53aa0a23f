//! The three correspondence regimes, full set versus coreset.
//!
//! With a known matching only the rotation is solved; with a known rotation
//! the matching is an assignment problem; with neither, all permutations
//! are scanned. Running the exhaustive scan on a 5-marker coreset costs
//! 5! = 120 rotations instead of 10! = 3,628,800 on the full ten markers.

use pose_coreset::bench::planar10;
use pose_coreset::geometry::{kabsch_rotation, PointSet, RotationMatrix};
use pose_coreset::matching::{assignment_match, exhaustive_match, nn_match};
use pose_coreset::pose_coreset::pose_coreset;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let p = planar10();
    let r0 = RotationMatrix::random(3, &mut rng);
    let q = PointSet::new(p.matrix() * r0.matrix()).expect("valid points");

    // Regime 1: matching given, rotation wanted.
    let rot = kabsch_rotation(&p, &q, None).expect("kabsch");
    println!(
        "given matching: rotation recovered, |R - R0| = {:.2e}",
        (rot.matrix() - r0.matrix()).abs().max()
    );

    // Regime 2: rotation given, matching wanted.
    let assign = assignment_match(&p, &q, &rot).expect("assignment");
    println!(
        "given rotation: assignment is identity permutation: {}",
        assign.mapping() == (0..10).collect::<Vec<_>>()
    );
    let nn = nn_match(&p, &q).expect("nn");
    println!("nearest-neighbour agrees: {}", nn.mapping() == assign.mapping());

    // Regime 3: neither given. The coreset shrinks the factorial scan.
    let coreset = pose_coreset(&p, &q).expect("coreset");
    let (pt, qt, _w) = coreset.extract_weighted_pairs(&p, &q).expect("extract");
    let small = exhaustive_match(&pt, &qt).expect("small scan");
    println!(
        "coreset scan:  {} markers, {} permutations evaluated",
        pt.n(),
        small.permutations_evaluated
    );
    let full = exhaustive_match(&p, &q).expect("full scan");
    println!(
        "full scan:     {} markers, {} permutations evaluated",
        p.n(),
        full.permutations_evaluated
    );
    println!(
        "both recover the planted alignment: {} / {}",
        small.cost < 1e-12,
        full.cost < 1e-12
    );
}
