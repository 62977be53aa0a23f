//! One-pass sum-preserving reduction of a long vector stream.
//!
//! The reducer never holds more than d'+1 weighted vectors, yet its
//! retained weighted sum tracks the exact running sum. Streams can also be
//! split, reduced independently, and merged.

use nalgebra::DVector;
use pose_coreset::caratheodory::StreamingReducer;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() {
    let dim = 6;
    let n = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let points: Vec<DVector<f64>> = (0..n)
        .map(|_| DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng)))
        .collect();
    let exact: DVector<f64> = points.iter().fold(DVector::zeros(dim), |a, p| a + p);

    let mut reducer = StreamingReducer::new(dim);
    for (i, p) in points.iter().enumerate() {
        reducer.insert(i, p.clone()).expect("insert");
    }
    println!(
        "streamed {n} vectors in R^{dim}, buffer never exceeded {} entries",
        dim + 1
    );
    let kept = reducer.finalize().expect("finalize");
    let mut sum = DVector::<f64>::zeros(dim);
    for (i, w) in kept.iter() {
        sum.axpy(w, &points[i], 1.0);
    }
    println!("kept {} weighted vectors", kept.len());
    println!(
        "|retained sum - exact sum| = {:.3e} (relative {:.3e})",
        (&sum - &exact).norm(),
        (&sum - &exact).norm() / exact.norm()
    );

    // Split / merge: two halves reduced independently agree with the
    // sequential pass.
    let mut left = StreamingReducer::new(dim);
    let mut right = StreamingReducer::new(dim);
    for (i, p) in points.iter().enumerate() {
        let target = if i < n / 2 { &mut left } else { &mut right };
        target.insert(i, p.clone()).expect("insert");
    }
    let merged = left.merge(right).expect("merge").finalize().expect("finalize");
    let mut merged_sum = DVector::<f64>::zeros(dim);
    for (i, w) in merged.iter() {
        merged_sum.axpy(w, &points[i], 1.0);
    }
    println!(
        "split/merge deviation from exact sum: {:.3e}",
        (&merged_sum - &exact).norm() / exact.norm()
    );
}
