//! Pose time from a precomputed coreset versus the full set.
//!
//! The coreset path is independent of n, so it flattens as n grows; the
//! advantage shrinks as d approaches sqrt(n), where the coreset is nearly
//! as large as the input. (A reduced sweep; the posebench CLI runs the full
//! one.)

use pose_coreset::bench::{run_timing_trial, TimingTrialConfig};

fn main() {
    let cfg = TimingTrialConfig {
        n_list: vec![1_000, 10_000, 100_000],
        d_fixed: 3,
        d_list: vec![3, 10, 30],
        n_fixed: 10_000,
        repetitions: 15,
        warmup: 3,
        seed: 37,
    };
    let report = run_timing_trial(&cfg).expect("timing");
    println!("{:>8} {:>4} {:>14} {:>14} {:>10}", "n", "d", "coreset_ns", "full_ns", "advantage");
    for pair in report.timing.chunks(2) {
        let (cs, full) = (&pair[0], &pair[1]);
        println!(
            "{:>8} {:>4} {:>14.0} {:>14.0} {:>9.1}x",
            cs.n,
            cs.d,
            cs.median_ns,
            full.median_ns,
            full.median_ns / cs.median_ns
        );
    }
}
