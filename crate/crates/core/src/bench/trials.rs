use std::sync::mpsc;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bench::config::TrialConfig;
use crate::bench::report::{LatencySummary, TimingRow, TrialReport};
use crate::bench::simulate::simulate_frames;
use crate::bench::layout::random_layout;
use crate::error::{Error, Result};
use crate::geometry::{
    centroid, geodesic_deg, kabsch_rotation, PointSet, RotationMatrix,
};
use crate::pose_coreset::{pose_coreset, PoseCoreset};
use crate::seed;

/// Centered copy of a point set.
fn centered(p: &PointSet) -> Result<PointSet> {
    let c = centroid(p, None)?;
    p.translated(&c)
}

struct PreparedFrames {
    p_centered: PointSet,
    q_centered: Vec<PointSet>,
    /// Full-set optimal rotation per frame: the ground-truth method.
    full_rotation: Vec<RotationMatrix>,
}

fn prepare(cfg: &TrialConfig) -> Result<PreparedFrames> {
    let p = cfg.base_points()?;
    let p_centered = centered(&p)?;
    let frames = simulate_frames(cfg)?;
    let mut q_centered = Vec::with_capacity(frames.len());
    let mut full_rotation = Vec::with_capacity(frames.len());
    for f in &frames {
        let qc = centered(&f.q)?;
        full_rotation.push(kabsch_rotation(&p_centered, &qc, None)?);
        q_centered.push(qc);
    }
    Ok(PreparedFrames {
        p_centered,
        q_centered,
        full_rotation,
    })
}

/// Rotation error of the coreset and uniform-sample methods against the
/// all-points method, per calculation cycle.
///
/// For each cycle `x`, the coreset is rebuilt from the current frame every
/// `x` frames and a fresh uniform sample of the same size is drawn; on every
/// frame both estimate the rotation of the centered frame and are scored
/// geodesically against the full-set Kabsch rotation.
pub fn run_error_trial(cfg: &TrialConfig) -> Result<TrialReport> {
    cfg.validate()?;
    let prep = prepare(cfg)?;
    let n = prep.p_centered.n();
    let mut report = TrialReport::new("error-trial", cfg.seed, cfg.sigma, cfg.frames, cfg.cycles.clone());

    for (ci, &cycle) in cfg.cycles.iter().enumerate() {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed::derive(cfg.seed, 0x554e4946 ^ (ci as u64) << 8));
        let mut coreset: Option<PoseCoreset> = None;
        let mut sample: Vec<usize> = Vec::new();
        let mut cs_trace = Vec::with_capacity(cfg.frames);
        let mut us_trace = Vec::with_capacity(cfg.frames);
        for t in 0..cfg.frames {
            let qc = &prep.q_centered[t];
            if t % cycle == 0 {
                let built = pose_coreset(&prep.p_centered, qc)?;
                let size = built.sparsity();
                report.coreset_size = report.coreset_size.max(size);
                sample = rand::seq::index::sample(&mut rng, n, size.min(n)).into_vec();
                sample.sort_unstable();
                coreset = Some(built);
            }
            let cs = coreset.as_ref().expect("coreset built at frame 0");
            let r_cs = cs.solve_rotation(&prep.p_centered, qc)?.rotation;
            let p_sub = prep.p_centered.select_rows(&sample)?;
            let q_sub = qc.select_rows(&sample)?;
            let r_us = kabsch_rotation(&p_sub, &q_sub, None)?;
            cs_trace.push(geodesic_deg(&r_cs, &prep.full_rotation[t])?);
            us_trace.push(geodesic_deg(&r_us, &prep.full_rotation[t])?);
        }
        report
            .coreset_mean_deg
            .push(cs_trace.iter().sum::<f64>() / cfg.frames as f64);
        report
            .uniform_mean_deg
            .push(us_trace.iter().sum::<f64>() / cfg.frames as f64);
        report.per_frame_coreset_deg.push(cs_trace);
        report.per_frame_uniform_deg.push(us_trace);
    }
    Ok(report)
}

/// Tracking-loop emulation: a slow task recomputes the coreset every `x`
/// frames and publishes it as an immutable snapshot; the fast task computes
/// the per-frame pose from the latest published snapshot and records how
/// stale it was. With `threaded` the slow task runs on its own thread and
/// publication is synchronized at the cadence boundaries, so the report is
/// identical to the single-context run.
pub fn run_tracking_loop(
    cfg: &TrialConfig,
    threaded: bool,
    include_latency: bool,
) -> Result<TrialReport> {
    cfg.validate()?;
    let prep = prepare(cfg)?;
    let mut report =
        TrialReport::new("tracking-loop", cfg.seed, cfg.sigma, cfg.frames, cfg.cycles.clone());
    let mut lat_sum = 0.0f64;
    let mut lat_max = 0.0f64;
    let mut lat_count = 0u64;

    for &cycle in &cfg.cycles {
        let mut cs_trace = Vec::with_capacity(cfg.frames);
        let mut stale_trace = Vec::with_capacity(cfg.frames);

        if !threaded {
            let mut published: Option<(usize, Arc<PoseCoreset>)> = None;
            for t in 0..cfg.frames {
                let qc = &prep.q_centered[t];
                if t % cycle == 0 {
                    published = Some((t, Arc::new(pose_coreset(&prep.p_centered, qc)?)));
                }
                let (at, cs) = published.as_ref().expect("published at frame 0");
                let start = Instant::now();
                let r_cs = cs.solve_rotation(&prep.p_centered, qc)?.rotation;
                let lat = start.elapsed().as_nanos() as f64;
                lat_sum += lat;
                lat_max = lat_max.max(lat);
                lat_count += 1;
                report.coreset_size = report.coreset_size.max(cs.sparsity());
                stale_trace.push(t - at);
                cs_trace.push(geodesic_deg(&r_cs, &prep.full_rotation[t])?);
            }
        } else {
            // The slow task owns coreset construction; the fast task blocks
            // only at the cadence boundary, where a fresh snapshot is due.
            let (job_tx, job_rx) = mpsc::channel::<(usize, PointSet)>();
            let (out_tx, out_rx) = mpsc::channel::<Result<(usize, Arc<PoseCoreset>)>>();
            let p_slow = prep.p_centered.clone();
            let worker = std::thread::spawn(move || {
                while let Ok((t, qc)) = job_rx.recv() {
                    let built = pose_coreset(&p_slow, &qc).map(|c| (t, Arc::new(c)));
                    if out_tx.send(built).is_err() {
                        break;
                    }
                }
            });
            let mut published: Option<(usize, Arc<PoseCoreset>)> = None;
            for t in 0..cfg.frames {
                let qc = &prep.q_centered[t];
                if t % cycle == 0 {
                    job_tx
                        .send((t, qc.clone()))
                        .map_err(|_| Error::NumericalContract("coreset worker died".into()))?;
                    let got = out_rx
                        .recv()
                        .map_err(|_| Error::NumericalContract("coreset worker died".into()))??;
                    published = Some(got);
                }
                let (at, cs) = published.as_ref().expect("published at frame 0");
                let start = Instant::now();
                let r_cs = cs.solve_rotation(&prep.p_centered, qc)?.rotation;
                let lat = start.elapsed().as_nanos() as f64;
                lat_sum += lat;
                lat_max = lat_max.max(lat);
                lat_count += 1;
                report.coreset_size = report.coreset_size.max(cs.sparsity());
                stale_trace.push(t - at);
                cs_trace.push(geodesic_deg(&r_cs, &prep.full_rotation[t])?);
            }
            drop(job_tx);
            worker
                .join()
                .map_err(|_| Error::NumericalContract("coreset worker panicked".into()))?;
        }

        report
            .coreset_mean_deg
            .push(cs_trace.iter().sum::<f64>() / cfg.frames as f64);
        report.per_frame_coreset_deg.push(cs_trace);
        report.staleness.push(stale_trace);
    }
    if include_latency {
        report.latency = Some(LatencySummary {
            mean_ns: lat_sum / lat_count.max(1) as f64,
            max_ns: lat_max,
        });
    }
    Ok(report)
}

/// Size sweeps for the timing comparison.
#[derive(Debug, Clone)]
pub struct TimingTrialConfig {
    /// Marker counts swept at `d_fixed`.
    pub n_list: Vec<usize>,
    pub d_fixed: usize,
    /// Dimensions swept at `n_fixed`.
    pub d_list: Vec<usize>,
    pub n_fixed: usize,
    pub repetitions: usize,
    pub warmup: usize,
    pub seed: u64,
}

impl Default for TimingTrialConfig {
    fn default() -> Self {
        Self {
            n_list: vec![1_000, 10_000, 100_000, 1_000_000],
            d_fixed: 3,
            d_list: vec![3, 10, 30, 100],
            n_fixed: 10_000,
            repetitions: 30,
            warmup: 5,
            seed: 1,
        }
    }
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        0.5 * (samples[n / 2 - 1] + samples[n / 2])
    }
}

fn time_median<F: FnMut()>(mut op: F, warmup: usize, reps: usize) -> f64 {
    for _ in 0..warmup {
        op();
    }
    let mut samples = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        op();
        samples.push(start.elapsed().as_nanos() as f64);
    }
    median(&mut samples)
}

/// One measured pair: pose-from-precomputed-coreset versus full-set Kabsch,
/// on a centered rotated copy of a random layout.
fn timing_point(
    n: usize,
    d: usize,
    seed: u64,
    warmup: usize,
    reps: usize,
    rows: &mut Vec<TimingRow>,
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = random_layout(n, d, &mut rng)?;
    let r0 = RotationMatrix::random(d, &mut rng);
    let mut q = p.matrix() * r0.matrix();
    for v in q.iter_mut() {
        let g: f64 = StandardNormal.sample(&mut rng);
        *v += 1e-3 * g;
    }
    let q = PointSet::new(q)?;
    let pc = centered(&p)?;
    let qc = centered(&q)?;

    let coreset = pose_coreset(&pc, &qc)?;

    let mut sink = 0.0f64;
    let cs_ns = time_median(
        || {
            let r = coreset
                .solve_rotation(&pc, &qc)
                .expect("coreset solve")
                .rotation;
            sink += r.matrix()[(0, 0)];
        },
        warmup,
        reps,
    );
    let full_ns = time_median(
        || {
            let r = kabsch_rotation(&pc, &qc, None).expect("full solve");
            sink += r.matrix()[(0, 0)];
        },
        warmup,
        reps,
    );
    std::hint::black_box(sink);

    rows.push(TimingRow {
        method: "coreset".into(),
        n,
        d,
        median_ns: cs_ns,
    });
    rows.push(TimingRow {
        method: "full".into(),
        n,
        d,
        median_ns: full_ns,
    });
    Ok(())
}

/// Measures pose-from-precomputed-coreset and full-set Kabsch times over a
/// sweep of `n` at fixed `d` and a sweep of `d` at fixed `n`. Construction
/// happens once per size point, outside the timed region.
pub fn run_timing_trial(cfg: &TimingTrialConfig) -> Result<TrialReport> {
    if cfg.n_list.is_empty() || cfg.d_list.is_empty() {
        return Err(Error::InvalidConfig("timing sweeps must be nonempty".into()));
    }
    if cfg.repetitions == 0 {
        return Err(Error::InvalidConfig("repetitions must be positive".into()));
    }
    let mut report = TrialReport::new("timing-trial", cfg.seed, 0.0, 0, Vec::new());
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        timing_point(
            n,
            cfg.d_fixed,
            seed::derive(cfg.seed, n as u64),
            cfg.warmup,
            cfg.repetitions,
            &mut rows,
        )?;
    }
    for &d in &cfg.d_list {
        timing_point(
            cfg.n_fixed,
            d,
            seed::derive(cfg.seed, 0x4453 ^ d as u64),
            cfg.warmup,
            cfg.repetitions,
            &mut rows,
        )?;
    }
    report.timing = rows;
    Ok(report)
}
