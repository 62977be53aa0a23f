//! The three correspondence regimes: matching given (pure rotation),
//! rotation given (assignment), and neither (exhaustive search over
//! permutations), plus the ICP loop that alternates matching and alignment.
//! Every operation runs on a full set or on a coreset's extracted rows.

mod hungarian;
mod icp;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{kabsch_from_covariance, PointSet, RotationMatrix};

pub use icp::{icp, icp_multi_restart, IcpInit, IcpParams, IcpResult, MultiRestartIcp};

/// Permutation sizes past this are refused by [`exhaustive_match`].
pub const FACTORIAL_GUARD: usize = 9;

/// A matching from source rows to rows of `Q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Correspondence {
    mapping: Vec<usize>,
    injective: bool,
}

impl Correspondence {
    pub fn new(mapping: Vec<usize>, q_len: usize) -> Result<Self> {
        for &j in &mapping {
            if j >= q_len {
                return Err(Error::InvalidConfig(format!(
                    "correspondence target {j} out of range for |Q| = {q_len}"
                )));
            }
        }
        let injective = {
            let mut seen = vec![false; q_len];
            mapping.iter().all(|&j| {
                let fresh = !seen[j];
                seen[j] = true;
                fresh
            })
        };
        Ok(Self { mapping, injective })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mapping: (0..n).collect(),
            injective: true,
        }
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn is_injective(&self) -> bool {
        self.injective
    }

    pub fn get(&self, i: usize) -> usize {
        self.mapping[i]
    }

    /// JSON integer-array form.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!(self.mapping)
    }

    pub fn from_json(text: &str, q_len: usize) -> Result<Self> {
        let mapping: Vec<usize> = serde_json::from_str(text)?;
        Self::new(mapping, q_len)
    }
}

/// Matches each source row to its nearest point in `Q` by brute-force scan;
/// ties take the smaller index. Not necessarily injective.
pub fn nn_match(source: &PointSet, q: &PointSet) -> Result<Correspondence> {
    if source.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            context: "nn_match",
            expected: source.dim(),
            got: q.dim(),
        });
    }
    let mut mapping = Vec::with_capacity(source.n());
    for i in 0..source.n() {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for j in 0..q.n() {
            let mut dist = 0.0;
            for k in 0..q.dim() {
                let diff = source.matrix()[(i, k)] - q.matrix()[(j, k)];
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

/// Minimum-cost injective matching of `P` onto `Q` under a known rotation:
/// minimizes `sum_i ||p_i - R q_{f(i)}||^2` with a cubic-time assignment
/// solver. Requires `|P| <= |Q|`.
pub fn assignment_match(
    p: &PointSet,
    q: &PointSet,
    rotation: &RotationMatrix,
) -> Result<Correspondence> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            context: "assignment_match",
            expected: p.dim(),
            got: q.dim(),
        });
    }
    if p.n() > q.n() {
        return Err(Error::InvalidConfig(format!(
            "assignment_match needs |P| <= |Q|, got {} > {}",
            p.n(),
            q.n()
        )));
    }
    let rotated = q.matrix() * rotation.matrix().transpose();
    let cost = DMatrix::from_fn(p.n(), q.n(), |i, j| {
        let mut acc = 0.0;
        for k in 0..p.dim() {
            let diff = p.matrix()[(i, k)] - rotated[(j, k)];
            acc += diff * diff;
        }
        acc
    });
    let mapping = hungarian::solve_assignment(&cost);
    Correspondence::new(mapping, q.n())
}

/// Result of the exhaustive correspondence search.
#[derive(Debug, Clone)]
pub struct ExhaustiveMatch {
    pub correspondence: Correspondence,
    pub rotation: RotationMatrix,
    pub cost: f64,
    /// Number of permutations scanned: exactly `|P|!`.
    pub permutations_evaluated: u64,
}

/// Scans all `n!` permutations of `Q`, solving Wahba's problem for each, and
/// returns the jointly optimal correspondence and rotation. Refuses `n`
/// above [`FACTORIAL_GUARD`].
pub fn exhaustive_match(p: &PointSet, q: &PointSet) -> Result<ExhaustiveMatch> {
    if p.n() != q.n() || p.dim() != q.dim() {
        return Err(Error::ShapeMismatch {
            context: "exhaustive_match",
            left: (p.n(), p.dim()),
            right: (q.n(), q.dim()),
        });
    }
    let n = p.n();
    if n > FACTORIAL_GUARD {
        return Err(Error::FactorialGuard {
            n,
            guard: FACTORIAL_GUARD,
        });
    }
    let d = p.dim();

    // Squared norms are permutation-invariant; a permutation's optimal cost
    // follows from the singular values of its cross-covariance:
    // cost = |P|^2 + |Q|^2 - 2 (s_1 + ... + s_{d-1} + det_sign * s_d).
    let const_term: f64 = p
        .matrix()
        .iter()
        .map(|v| v * v)
        .chain(q.matrix().iter().map(|v| v * v))
        .sum();

    let mut perm: Vec<usize> = (0..n).collect();
    let mut cov = crate::geometry::cross_covariance(p, q, None)?;
    let mut best_cost = f64::INFINITY;
    let mut best_perm = perm.clone();
    let mut evaluated = 0u64;

    // Heap's algorithm; each transposition updates the covariance by two
    // rank-one terms instead of a full rebuild.
    let mut counters = vec![0usize; n];
    let swap_rows = |cov: &mut DMatrix<f64>, perm: &mut Vec<usize>, a: usize, b: usize| {
        for k in 0..d {
            for l in 0..d {
                let pa = p.matrix()[(a, k)];
                let pb = p.matrix()[(b, k)];
                let qa = q.matrix()[(perm[a], l)];
                let qb = q.matrix()[(perm[b], l)];
                cov[(k, l)] += pa * (qb - qa) + pb * (qa - qb);
            }
        }
        perm.swap(a, b);
    };

    let mut evaluate = |cov: &DMatrix<f64>, perm: &[usize], evaluated: &mut u64| {
        *evaluated += 1;
        let svd = cov.clone().svd(false, false);
        let sum: f64 = svd.singular_values.iter().sum();
        let smallest = svd
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let sign = if cov.determinant() < 0.0 { -1.0 } else { 1.0 };
        let trace_max = sum - smallest + sign * smallest;
        let cost = const_term - 2.0 * trace_max;
        if cost < best_cost {
            best_cost = cost;
            best_perm = perm.to_vec();
        }
    };

    evaluate(&cov, &perm, &mut evaluated);
    let mut i = 1usize;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                swap_rows(&mut cov, &mut perm, 0, i);
            } else {
                swap_rows(&mut cov, &mut perm, counters[i], i);
            }
            evaluate(&cov, &perm, &mut evaluated);
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }

    let correspondence = Correspondence::new(best_perm.clone(), n)?;
    let reordered = q.select_rows(&best_perm)?;
    let sol = kabsch_from_covariance(&crate::geometry::cross_covariance(p, &reordered, None)?)?;
    let cost = crate::geometry::cost(p, &reordered, &sol.rotation, None, None)?;
    Ok(ExhaustiveMatch {
        correspondence,
        rotation: sol.rotation,
        cost,
        permutations_evaluated: evaluated,
    })
}
