use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{estimate_pose, PointSet, RigidMotion};
use crate::matching::Correspondence;

/// Iteration controls for [`icp`].
#[derive(Debug, Clone, Copy)]
pub struct IcpParams {
    pub max_iter: usize,
    /// Stop when the cost decrease falls below this absolute threshold.
    pub tol: f64,
}

impl Default for IcpParams {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-10,
        }
    }
}

/// Starting correspondence for the alternation.
#[derive(Debug, Clone)]
pub enum IcpInit {
    Given(Correspondence),
    /// Random injective mapping drawn from the seeded generator.
    Random(u64),
}

#[derive(Debug, Clone)]
pub struct IcpResult {
    pub motion: RigidMotion,
    pub correspondence: Correspondence,
    pub iterations: usize,
    pub converged: bool,
    /// Cost after each iteration; nonincreasing by construction.
    pub cost_trace: Vec<f64>,
}

fn mapped_cost(p: &PointSet, q: &PointSet, map: &Correspondence, motion: &RigidMotion) -> f64 {
    let moved = q.matrix() * motion.rotation.matrix().transpose();
    let mut total = 0.0;
    for i in 0..p.n() {
        let j = map.get(i);
        let mut sq = 0.0;
        for k in 0..p.dim() {
            let diff = p.matrix()[(i, k)] - moved[(j, k)] - motion.translation[k];
            sq += diff * diff;
        }
        total += sq;
    }
    total
}

fn rematch(p: &PointSet, q: &PointSet, motion: &RigidMotion) -> Result<Correspondence> {
    let moved = q.matrix() * motion.rotation.matrix().transpose();
    let mut mapping = Vec::with_capacity(p.n());
    for i in 0..p.n() {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for j in 0..q.n() {
            let mut dist = 0.0;
            for k in 0..p.dim() {
                let diff = p.matrix()[(i, k)] - moved[(j, k)] - motion.translation[k];
                dist += diff * diff;
            }
            if dist < best_d {
                best_d = dist;
                best = j;
            }
        }
        mapping.push(best);
    }
    Correspondence::new(mapping, q.n())
}

fn random_injective(n: usize, m: usize, seed: u64) -> Result<Correspondence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = rand::seq::index::sample(&mut rng, m, n).into_vec();
    Correspondence::new(picked, m)
}

/// Iterative closest point: alternates the optimal rigid motion for the
/// current correspondence with nearest-neighbour rematching under that
/// motion, until the matching is stable, the cost decrease drops below
/// `tol`, or `max_iter` is hit. The cost trace never increases: both steps
/// are exact minimizations of the same objective.
pub fn icp(p: &PointSet, q: &PointSet, init: IcpInit, params: IcpParams) -> Result<IcpResult> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            context: "icp",
            expected: p.dim(),
            got: q.dim(),
        });
    }
    let mut mapping = match init {
        IcpInit::Given(c) => {
            if c.len() != p.n() {
                return Err(Error::InvalidConfig(format!(
                    "icp initial correspondence covers {} rows, point set has {}",
                    c.len(),
                    p.n()
                )));
            }
            c
        }
        IcpInit::Random(seed) => {
            if p.n() > q.n() {
                return Err(Error::InvalidConfig(
                    "icp random init needs |P| <= |Q|".into(),
                ));
            }
            random_injective(p.n(), q.n(), seed)?
        }
    };

    let mut motion = RigidMotion::identity(p.dim());
    let mut cost_trace = Vec::new();
    let mut prev_cost = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..params.max_iter {
        iterations += 1;
        let matched = q.select_rows(mapping.mapping())?;
        motion = estimate_pose(p, &matched, None)?;
        let next = rematch(p, q, &motion)?;
        let cost = mapped_cost(p, q, &next, &motion);
        debug_assert!(
            cost <= prev_cost + 1e-9 * (1.0 + prev_cost.min(f64::MAX)),
            "icp cost increased: {prev_cost} -> {cost}"
        );
        cost_trace.push(cost);
        let stable = next == mapping;
        mapping = next;
        if stable || prev_cost - cost < params.tol {
            converged = true;
            break;
        }
        prev_cost = cost;
    }

    Ok(IcpResult {
        motion,
        correspondence: mapping,
        iterations,
        converged,
        cost_trace,
    })
}

#[derive(Debug, Clone)]
pub struct MultiRestartIcp {
    pub best: IcpResult,
    /// Which restart won, and the seed it used — surfaced for
    /// reproducibility.
    pub restart: usize,
    pub seed: u64,
}

/// Runs `restarts` independent seeded ICP attempts and keeps the lowest
/// final cost. Restart seeds are derived from `base_seed` per restart, so
/// the result does not depend on scheduling.
pub fn icp_multi_restart(
    p: &PointSet,
    q: &PointSet,
    restarts: usize,
    base_seed: u64,
    params: IcpParams,
) -> Result<MultiRestartIcp> {
    if restarts == 0 {
        return Err(Error::InvalidConfig("icp needs at least one restart".into()));
    }
    let mut best: Option<MultiRestartIcp> = None;
    for r in 0..restarts {
        let seed = derive_seed(base_seed, r as u64);
        let run = icp(p, q, IcpInit::Random(seed), params)?;
        let cost = run.cost_trace.last().copied().unwrap_or(f64::INFINITY);
        let better = match &best {
            None => true,
            Some(b) => cost < b.best.cost_trace.last().copied().unwrap_or(f64::INFINITY),
        };
        if better {
            best = Some(MultiRestartIcp {
                best: run,
                restart: r,
                seed,
            });
        }
    }
    Ok(best.expect("at least one restart"))
}

/// SplitMix64 step: decorrelates per-restart seeds from the base seed.
pub(crate) fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(stream.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
