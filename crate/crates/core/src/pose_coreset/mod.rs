//! The pose-coreset construction: embed each marker pair as a vector whose
//! stream sums to zero, sparsify the stream with the Caratheodory reducer,
//! and keep the surviving weights.
//!
//! For a pair `(P, Q)` with `rank(P) = r`, let `U D V^T` be an SVD of
//! `P^T Q`. The matrix `U^T (sum_i w_i p_i q_i^T) V` is diagonal for the
//! uniform weights, so any nonnegative reweighting that preserves its
//! off-diagonal entries (all zero) and the excluded rows leaves the optimal
//! rotation unchanged. Each pair contributes the off-diagonal entries of
//! `U^T p_i q_i^T V` restricted to the top `r` rows — a vector in
//! `R^{r(d-1)}` — and the streaming reducer keeps at most `r(d-1) + 1` of
//! them with positive weights.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::caratheodory::{ReducerStrategy, StreamingReducer, WeightedIndexSet};
use crate::error::{Error, Result};
use crate::geometry::{
    centroid, cost, estimate_pose, kabsch_solve, KabschSolution, PointSet, RotationMatrix,
    SvdFactors,
};

/// Default relative singular-value threshold for rank decisions. Noisy
/// planar rigs hover near rank boundaries, so this is configurable on the
/// builder.
pub const RANK_TOL: f64 = 1e-9;

/// Extends `thin` (orthonormal columns, `d x k`) to a full `d x d`
/// orthogonal matrix whose leading `k` columns equal `thin`.
fn complete_orthonormal(thin: &DMatrix<f64>) -> DMatrix<f64> {
    let d = thin.nrows();
    let k = thin.ncols();
    debug_assert!(k <= d);
    let mut stacked = DMatrix::zeros(d, k + d);
    stacked.view_mut((0, 0), (d, k)).copy_from(thin);
    for i in 0..d {
        stacked[(i, k + i)] = 1.0;
    }
    let qr = stacked.qr();
    let mut q = qr.q();
    let r = qr.r();
    // Householder QR fixes column signs only up to the diagonal of R; the
    // leading block must reproduce `thin` exactly.
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            for i in 0..d {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q.columns(0, d).into_owned()
}

/// Numerical rank of `P` and an orthogonal change of coordinates aligning
/// its rows: every row of `P * basis` has (near) zeros in its last `d - r`
/// entries. The basis has determinant +1.
pub fn numerical_rank(p: &PointSet, tol: f64) -> Result<(usize, DMatrix<f64>)> {
    let d = p.dim();
    let svd = p.matrix().clone().svd(false, true);
    let sigma = &svd.singular_values;
    let top = sigma.max();
    if top <= 0.0 {
        return Err(Error::RankZero);
    }
    let r = sigma.iter().filter(|&&s| s >= tol * top).count();
    let v_thin = svd.v_t.expect("svd requested v_t").transpose();
    let mut basis = if v_thin.ncols() < d {
        complete_orthonormal(&v_thin)
    } else {
        v_thin
    };
    if basis.determinant() < 0.0 {
        for i in 0..d {
            basis[(i, d - 1)] = -basis[(i, d - 1)];
        }
    }
    Ok((r, basis))
}

/// The embedding of one marker pair: the entries of `U^T p q^T V`, keeping
/// the top `r` rows and dropping the `r` diagonal entries, flattened row
/// major to length `r(d-1)`.
///
/// With factors produced by [`PoseCoresetBuilder::build`], `U` already
/// absorbs the rank-aligning basis, so `p` and `q` are passed in the
/// original coordinates. Summed over all pairs the embedding vanishes:
/// `sum_i U^T p_i q_i^T V = D` is diagonal.
pub fn reduced_vector(
    p: &DVector<f64>,
    q: &DVector<f64>,
    factors: &SvdFactors,
    rank: usize,
) -> DVector<f64> {
    let d = p.len();
    let a = factors.u.transpose() * p;
    let c = factors.v.transpose() * q;
    let mut out = DVector::zeros(rank * (d - 1));
    let mut at = 0;
    for j in 0..rank {
        for l in 0..d {
            if l != j {
                out[at] = a[j] * c[l];
                at += 1;
            }
        }
    }
    out
}

/// A pose coreset: sparse weights over marker indices plus the factors they
/// were built against.
#[derive(Debug, Clone)]
pub struct PoseCoreset {
    weights: WeightedIndexSet,
    factors: SvdFactors,
    rank: usize,
    reduced_dim: usize,
    basis: DMatrix<f64>,
}

/// Configuration for [`pose_coreset`].
#[derive(Debug, Clone)]
pub struct PoseCoresetBuilder {
    rank_tol: f64,
    normalize: bool,
    strategy: Option<ReducerStrategy>,
}

impl Default for PoseCoresetBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl PoseCoresetBuilder {
    pub fn new() -> Self {
        Self {
            rank_tol: RANK_TOL,
            normalize: false,
            strategy: None,
        }
    }

    /// Relative singular-value cutoff used for the rank of `P`.
    pub fn rank_tolerance(mut self, tol: f64) -> Self {
        self.rank_tol = tol;
        self
    }

    /// Rescale the final weights to sum to one. Off by default: any positive
    /// scaling of the weights yields the same optimal rotation, so the raw
    /// reducer weights are kept.
    pub fn normalize(mut self, yes: bool) -> Self {
        self.normalize = yes;
        self
    }

    /// Overrides the reducer strategy (auto-selected by reduced dimension).
    pub fn strategy(mut self, strategy: ReducerStrategy) -> Self {
        self.strategy = Some(strategy);
        self
    }

    /// Streams the embedding of `(P, Q)` through the reducer. Single pass
    /// over the rows, memory bounded by the reduced dimension.
    pub fn build(&self, p: &PointSet, q: &PointSet) -> Result<PoseCoreset> {
        if p.n() != q.n() || p.dim() != q.dim() {
            return Err(Error::ShapeMismatch {
                context: "pose_coreset pair",
                left: (p.n(), p.dim()),
                right: (q.n(), q.dim()),
            });
        }
        let d = p.dim();
        let (rank, basis) = numerical_rank(p, self.rank_tol)?;

        // Cross-covariance in the rank-aligned frame; rows past `rank` are
        // dropped (they are below the rank tolerance by construction).
        let n_full = p.matrix().transpose() * q.matrix();
        let aligned = basis.transpose() * &n_full;
        let top = aligned.rows(0, rank).into_owned();

        // Full SVD of the top block, completed so V spans R^d and U is
        // block-diagonal in the aligned frame. Keeping the blocks explicit
        // guarantees the excluded rows of the embedding vanish pointwise
        // even when rank(P^T Q) < rank(P).
        let svd = top.svd(true, true);
        let u_bar = svd.u.expect("svd requested u");
        let v_thin = svd.v_t.expect("svd requested v_t").transpose();
        let v_full = if v_thin.ncols() < d {
            complete_orthonormal(&v_thin)
        } else {
            v_thin
        };
        let mut u_aligned = DMatrix::identity(d, d);
        u_aligned.view_mut((0, 0), (rank, rank)).copy_from(&u_bar);
        let u_cache = &basis * u_aligned;
        let mut sigma = DVector::zeros(d);
        for j in 0..rank {
            sigma[j] = svd.singular_values[j];
        }
        let factors = SvdFactors::from_raw_parts(u_cache, sigma, v_full)?;

        let reduced_dim = rank * (d - 1);
        let strategy = self
            .strategy
            .unwrap_or_else(|| ReducerStrategy::auto(reduced_dim));
        let mut reducer = StreamingReducer::with_strategy(reduced_dim, strategy);
        for i in 0..p.n() {
            let m = reduced_vector(&p.point(i), &q.point(i), &factors, rank);
            reducer.insert(i, m)?;
        }
        let mut weights = reducer.finalize()?;
        if self.normalize {
            let total = weights.total_weight();
            weights = weights.scaled(1.0 / total)?;
        }
        Ok(PoseCoreset {
            weights,
            factors,
            rank,
            reduced_dim,
            basis,
        })
    }
}

/// Builds a pose coreset for `(P, Q)` with default settings: at most
/// `r(d-1)+1` positive weights whose weighted pair has the same optimal
/// rotation as the full pair, for every rotation applied to either side.
pub fn pose_coreset(p: &PointSet, q: &PointSet) -> Result<PoseCoreset> {
    PoseCoresetBuilder::new().build(p, q)
}

impl PoseCoreset {
    pub fn weights(&self) -> &WeightedIndexSet {
        &self.weights
    }

    pub fn factors(&self) -> &SvdFactors {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `r(d-1)`: the ambient dimension of the reduction.
    pub fn reduced_dim(&self) -> usize {
        self.reduced_dim
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn sparsity(&self) -> usize {
        self.weights.len()
    }

    /// The size bound `r(d-1) + 1`.
    pub fn sparsity_bound(&self) -> usize {
        self.reduced_dim + 1
    }

    fn check_fresh(&self, p: &PointSet) -> Result<()> {
        if let Some(max) = self.weights.max_index() {
            if max >= p.n() {
                return Err(Error::StaleCoreset {
                    index: max,
                    n: p.n(),
                });
            }
        }
        Ok(())
    }

    /// The positive-weight rows of `(P, Q)` together with their weights:
    /// the weighted-Kabsch form of the coreset pair.
    pub fn extract_weighted_pairs(
        &self,
        p: &PointSet,
        q: &PointSet,
    ) -> Result<(PointSet, PointSet, Vec<f64>)> {
        if p.n() != q.n() || p.dim() != q.dim() {
            return Err(Error::ShapeMismatch {
                context: "extract pair",
                left: (p.n(), p.dim()),
                right: (q.n(), q.dim()),
            });
        }
        self.check_fresh(p)?;
        let indices = self.weights.indices();
        let pt = p.select_rows(&indices)?;
        let qt = q.select_rows(&indices)?;
        Ok((pt, qt, self.weights.weights()))
    }

    /// The same subset with every row scaled by `sqrt(w_i)`, so the plain
    /// unweighted solver applies: `P~^T Q~ = sum w_i p_i q_i^T`. Gathered in
    /// one column-major pass; this is the tracking fast path.
    pub fn extract_scaled_pairs(&self, p: &PointSet, q: &PointSet) -> Result<(PointSet, PointSet)> {
        if p.n() != q.n() || p.dim() != q.dim() {
            return Err(Error::ShapeMismatch {
                context: "extract pair",
                left: (p.n(), p.dim()),
                right: (q.n(), q.dim()),
            });
        }
        self.check_fresh(p)?;
        let indices = self.weights.indices();
        let roots: Vec<f64> = self.weights.weights().iter().map(|w| w.sqrt()).collect();
        let s = indices.len();
        let d = p.dim();
        let mut pm = DMatrix::zeros(s, d);
        let mut qm = DMatrix::zeros(s, d);
        for j in 0..d {
            for (row, &i) in indices.iter().enumerate() {
                pm[(row, j)] = p.matrix()[(i, j)] * roots[row];
                qm[(row, j)] = q.matrix()[(i, j)] * roots[row];
            }
        }
        Ok((PointSet::new(pm)?, PointSet::new(qm)?))
    }

    /// Optimal rotation of the weighted coreset pair, from a fresh
    /// sign-corrected SVD of the weighted cross-covariance. By the
    /// uniqueness of the optimal-rotation characterization, any such
    /// factorization yields a rotation optimal for the full pair.
    pub fn solve_rotation(&self, p: &PointSet, q: &PointSet) -> Result<KabschSolution> {
        let (ps, qs) = self.extract_scaled_pairs(p, q)?;
        kabsch_solve(&ps, &qs, None)
    }

    /// The weighted coreset cross-covariance conjugated by the cached
    /// factors: `U^T (sum w_i p_i q_i^T) V`. Diagonal (to tolerance) for a
    /// valid coreset; off-diagonal magnitudes are the exactness residue.
    pub fn conjugated_covariance(&self, p: &PointSet, q: &PointSet) -> Result<DMatrix<f64>> {
        let (pt, qt, w) = self.extract_weighted_pairs(p, q)?;
        let m = crate::geometry::cross_covariance(&pt, &qt, Some(&w))?;
        Ok(self.factors.u.transpose() * m * &self.factors.v)
    }
}

/// Residual of the coreset guarantee under a transform of both sides.
///
/// Forms `P A + mu` and `Q B + nu` (rows `A^T p_i + mu`, `B^T q_i + nu`),
/// solves the translation-optimal rotation from the transformed coreset
/// rows, and returns its full-set cost minus the translation-optimal
/// full-set cost. A valid coreset built on centered inputs keeps this within
/// `1e-8 * (1 + OPT)` for every rotation pair and shift.
pub fn validate_coreset(
    coreset: &PoseCoreset,
    p: &PointSet,
    q: &PointSet,
    a: &RotationMatrix,
    b: &RotationMatrix,
    mu: &DVector<f64>,
    nu: &DVector<f64>,
) -> Result<f64> {
    let transform = |s: &PointSet, r: &RotationMatrix, t: &DVector<f64>| -> Result<PointSet> {
        let mut m = s.matrix() * r.matrix();
        for mut row in m.row_iter_mut() {
            for j in 0..t.len() {
                row[j] += t[j];
            }
        }
        PointSet::new(m)
    };
    let pa = transform(p, a, mu)?;
    let qb = transform(q, b, nu)?;

    // Translation-optimal baseline on the full transformed pair.
    let full = estimate_pose(&pa, &qb, None)?;
    let opt = cost(&pa, &qb, &full.rotation, Some(&full.translation), None)?;

    // Coreset route: same centering (the full centroids are part of any
    // translation-optimal solve), rotation from the weighted coreset rows.
    let ca = centroid(&pa, None)?;
    let cb = centroid(&qb, None)?;
    let pac = pa.translated(&ca)?;
    let qbc = qb.translated(&cb)?;
    let (pt, qt, w) = coreset.extract_weighted_pairs(&pac, &qbc)?;
    let tilde = kabsch_solve(&pt, &qt, Some(&w))?.rotation;
    let mu_tilde = &ca - tilde.rotate(&cb);
    let got = cost(&pa, &qb, &tilde, Some(&mu_tilde), None)?;
    Ok(got - opt)
}

/// The serialized form of a coreset: exactly the fields needed for replay.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoresetRecord {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
    pub rank: usize,
    pub d: usize,
    pub basis: Vec<Vec<f64>>,
}

impl PoseCoreset {
    pub fn to_record(&self) -> CoresetRecord {
        let d = self.dim();
        CoresetRecord {
            indices: self.weights.indices(),
            weights: self.weights.weights(),
            rank: self.rank,
            d,
            basis: (0..d)
                .map(|i| (0..d).map(|j| self.basis[(i, j)]).collect())
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_record())?)
    }
}

impl CoresetRecord {
    pub fn from_json(text: &str) -> Result<Self> {
        let record: CoresetRecord = serde_json::from_str(text)?;
        if record.indices.len() != record.weights.len() {
            return Err(Error::InvalidConfig(
                "coreset record: indices and weights differ in length".into(),
            ));
        }
        Ok(record)
    }

    pub fn weight_set(&self) -> Result<WeightedIndexSet> {
        WeightedIndexSet::from_pairs(
            self.indices
                .iter()
                .copied()
                .zip(self.weights.iter().copied()),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::kabsch_rotation;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gauss_points(n: usize, d: usize, rng: &mut ChaCha8Rng) -> PointSet {
        PointSet::new(DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(rng))).unwrap()
    }

    /// Random n x d set of exact rank r: Gaussian factors through an
    /// orthonormal r-frame.
    fn rank_deficient_points(n: usize, d: usize, r: usize, rng: &mut ChaCha8Rng) -> PointSet {
        let coeff = DMatrix::<f64>::from_fn(n, r, |_, _| StandardNormal.sample(rng));
        let frame = RotationMatrix::random(d, rng);
        let basis = frame.matrix().columns(0, r).into_owned();
        PointSet::new(coeff * basis.transpose()).unwrap()
    }

    fn noisy_rotated_copy(p: &PointSet, sigma: f64, rng: &mut ChaCha8Rng) -> PointSet {
        let r0 = RotationMatrix::random(p.dim(), rng);
        let mut q = p.matrix() * r0.matrix();
        if sigma > 0.0 {
            for v in q.iter_mut() {
                let g: f64 = StandardNormal.sample(rng);
                *v += sigma * g;
            }
        }
        PointSet::new(q).unwrap()
    }

    #[test]
    fn rank_of_planar_full_and_collinear_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        let planar = rank_deficient_points(10, 3, 2, &mut rng);
        assert_eq!(numerical_rank(&planar, RANK_TOL).unwrap().0, 2);

        let full = gauss_points(10, 3, &mut rng);
        assert_eq!(numerical_rank(&full, RANK_TOL).unwrap().0, 3);

        let line = rank_deficient_points(8, 3, 1, &mut rng);
        assert_eq!(numerical_rank(&line, RANK_TOL).unwrap().0, 1);

        let zero = PointSet::new(DMatrix::zeros(4, 3)).unwrap();
        assert!(matches!(
            numerical_rank(&zero, RANK_TOL),
            Err(Error::RankZero)
        ));
    }

    #[test]
    fn rank_basis_zeroes_trailing_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(82);
        let p = rank_deficient_points(12, 4, 2, &mut rng);
        let (r, basis) = numerical_rank(&p, RANK_TOL).unwrap();
        assert_eq!(r, 2);
        assert!((basis.determinant() - 1.0).abs() < 1e-9);
        let aligned = p.matrix() * &basis;
        let scale = aligned.abs().max();
        for i in 0..p.n() {
            for j in r..p.dim() {
                assert!(aligned[(i, j)].abs() < 1e-9 * (1.0 + scale));
            }
        }
    }

    #[test]
    fn reduced_vector_shape_and_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        let p = rank_deficient_points(10, 3, 2, &mut rng);
        let q = noisy_rotated_copy(&p, 0.01, &mut rng);
        let coreset = pose_coreset(&p, &q).unwrap();
        assert_eq!(coreset.rank(), 2);
        assert_eq!(coreset.reduced_dim(), 4);
        let m = reduced_vector(&p.point(0), &q.point(0), coreset.factors(), coreset.rank());
        assert_eq!(m.len(), 4);
        let zero = reduced_vector(
            &nalgebra::DVector::zeros(3),
            &q.point(0),
            coreset.factors(),
            coreset.rank(),
        );
        assert!(zero.norm() == 0.0);
    }

    #[test]
    fn keystone_identity_sums_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(84);
        for (d, r) in [(2usize, 2usize), (3, 2), (3, 3), (4, 3), (5, 5)] {
            let p = rank_deficient_points(40, d, r, &mut rng);
            let q = noisy_rotated_copy(&p, 0.05, &mut rng);
            let coreset = pose_coreset(&p, &q).unwrap();
            let mut acc = nalgebra::DVector::<f64>::zeros(coreset.reduced_dim());
            for i in 0..p.n() {
                acc += reduced_vector(&p.point(i), &q.point(i), coreset.factors(), coreset.rank());
            }
            let d_norm = coreset.factors().singular_values.norm();
            assert!(
                acc.norm() <= 1e-8 * d_norm,
                "keystone violated: |sum m_i| = {:.3e} vs |D| = {:.3e} (d={d}, r={r})",
                acc.norm(),
                d_norm
            );
        }
    }

    #[test]
    fn planar_rig_gives_at_most_five_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(85);
        let p = rank_deficient_points(10, 3, 2, &mut rng);
        let q = noisy_rotated_copy(&p, 0.01, &mut rng);
        let coreset = pose_coreset(&p, &q).unwrap();
        assert_eq!(coreset.sparsity_bound(), 5);
        assert!(coreset.sparsity() <= 5);
    }

    #[test]
    fn tiny_input_keeps_unit_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(86);
        let p = gauss_points(5, 3, &mut rng); // r(d-1)+1 = 7 > 5
        let q = noisy_rotated_copy(&p, 0.0, &mut rng);
        let coreset = pose_coreset(&p, &q).unwrap();
        assert_eq!(coreset.sparsity(), 5);
        for (_, w) in coreset.weights().iter() {
            assert_eq!(w, 1.0);
        }
        let (pt, _, _) = coreset.extract_weighted_pairs(&p, &q).unwrap();
        assert_eq!(pt, p);
    }

    #[test]
    fn coreset_rotation_is_optimal_for_full_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(87);
        for _ in 0..10 {
            let p = gauss_points(100, 3, &mut rng);
            let q = noisy_rotated_copy(&p, 0.01, &mut rng);
            let coreset = pose_coreset(&p, &q).unwrap();
            assert!(coreset.sparsity() <= 7);

            let tilde = coreset.solve_rotation(&p, &q).unwrap().rotation;
            let full = kabsch_rotation(&p, &q, None).unwrap();
            let opt = cost(&p, &q, &full, None, None).unwrap();
            let got = cost(&p, &q, &tilde, None, None).unwrap();
            assert!(
                got <= opt + 1e-8 * (1.0 + opt),
                "coreset rotation suboptimal: {got} vs {opt}"
            );
        }
    }

    #[test]
    fn conjugated_covariance_is_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(88);
        let p = gauss_points(60, 3, &mut rng);
        let q = noisy_rotated_copy(&p, 0.02, &mut rng);
        let coreset = pose_coreset(&p, &q).unwrap();
        let e = coreset.conjugated_covariance(&p, &q).unwrap();
        let d_norm = coreset.factors().singular_values.norm();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(
                        e[(i, j)].abs() <= 1e-8 * d_norm,
                        "off-diagonal {i}{j} = {:.3e}",
                        e[(i, j)]
                    );
                }
            }
        }
    }

    #[test]
    fn scaled_extraction_reproduces_weighted_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(89);
        let p = gauss_points(30, 3, &mut rng);
        let q = noisy_rotated_copy(&p, 0.01, &mut rng);
        let coreset = pose_coreset(&p, &q).unwrap();
        let (ps, qs) = coreset.extract_scaled_pairs(&p, &q).unwrap();
        let direct = ps.matrix().transpose() * qs.matrix();
        let (pt, qt, w) = coreset.extract_weighted_pairs(&p, &q).unwrap();
        let weighted = crate::geometry::cross_covariance(&pt, &qt, Some(&w)).unwrap();
        assert!((direct - weighted).abs().max() < 1e-12 * (1.0 + p.n() as f64));
    }

    #[test]
    fn stale_coreset_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(90);
        let p = gauss_points(30, 3, &mut rng);
        let q = noisy_rotated_copy(&p, 0.01, &mut rng);
        let coreset = pose_coreset(&p, &q).unwrap();
        let small = gauss_points(2, 3, &mut rng);
        assert!(matches!(
            coreset.extract_weighted_pairs(&small, &small),
            Err(Error::StaleCoreset { .. })
        ));
    }

    #[test]
    fn validation_residual_small_under_transforms() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        // Centered build inputs: the guarantee under translated frames
        // requires them (translation-optimal reading of the invariance).
        let raw = gauss_points(50, 3, &mut rng);
        let p = raw
            .translated(&centroid(&raw, None).unwrap())
            .unwrap();
        let qraw = noisy_rotated_copy(&p, 0.01, &mut rng);
        let q = qraw
            .translated(&centroid(&qraw, None).unwrap())
            .unwrap();
        let coreset = pose_coreset(&p, &q).unwrap();

        let full = estimate_pose(&p, &q, None).unwrap();
        let opt = cost(&p, &q, &full.rotation, Some(&full.translation), None).unwrap();
        let tol = 1e-8 * (1.0 + opt);

        // Base case.
        let eye = RotationMatrix::identity(3);
        let zero = DVector::zeros(3);
        let base = validate_coreset(&coreset, &p, &q, &eye, &eye, &zero, &zero).unwrap();
        assert!(base.abs() <= tol, "base residual {base:.3e}");

        // Pure translations.
        for _ in 0..5 {
            let mu = DVector::from_fn(3, |_, _| StandardNormal.sample(&mut rng));
            let nu = DVector::from_fn(3, |_, _| StandardNormal.sample(&mut rng));
            let res = validate_coreset(&coreset, &p, &q, &eye, &eye, &mu, &nu).unwrap();
            assert!(res.abs() <= tol, "translation residual {res:.3e}");
        }

        // Random rotations and shifts on both sides.
        for _ in 0..20 {
            let a = RotationMatrix::random(3, &mut rng);
            let b = RotationMatrix::random(3, &mut rng);
            let mu = DVector::from_fn(3, |_, _| StandardNormal.sample(&mut rng));
            let nu = DVector::from_fn(3, |_, _| StandardNormal.sample(&mut rng));
            let res = validate_coreset(&coreset, &p, &q, &a, &b, &mu, &nu).unwrap();
            assert!(res.abs() <= tol, "transform residual {res:.3e}");
        }
    }

    #[test]
    fn reuse_across_frames_exact_and_noise_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(92);
        let raw = rank_deficient_points(12, 3, 2, &mut rng);
        let p = raw.translated(&centroid(&raw, None).unwrap()).unwrap();
        let q0 = noisy_rotated_copy(&p, 0.0, &mut rng);
        let coreset = pose_coreset(&p, &q0).unwrap();

        let mut residuals = Vec::new();
        for sigma in [0.0, 1e-3, 1e-2] {
            // A later frame: a fresh rigid motion of q0 plus noise.
            let b = RotationMatrix::random(3, &mut rng);
            let mut qt = q0.matrix() * b.matrix();
            for v in qt.iter_mut() {
                let g: f64 = StandardNormal.sample(&mut rng);
                *v += sigma * g;
            }
            let qt = PointSet::new(qt).unwrap();
            let qtc = qt.translated(&centroid(&qt, None).unwrap()).unwrap();

            let r_cs = {
                let (pt, qte, w) = coreset.extract_weighted_pairs(&p, &qtc).unwrap();
                kabsch_solve(&pt, &qte, Some(&w)).unwrap().rotation
            };
            let full = kabsch_rotation(&p, &qtc, None).unwrap();
            let opt = cost(&p, &qtc, &full, None, None).unwrap();
            let got = cost(&p, &qtc, &r_cs, None, None).unwrap();
            residuals.push(got - opt);
        }
        assert!(residuals[0].abs() <= 1e-10, "exact reuse: {:?}", residuals);
        assert!(
            residuals[2] >= residuals[1] - 1e-12,
            "noise response not monotone: {residuals:?}"
        );
    }

    #[test]
    fn optimal_rotation_characterization_is_svd_independent() {
        // Two SVDs differing by a rotation inside a repeated-singular-value
        // block characterize the same optimal rotations: V D_r U^T matches.
        let mut rng = ChaCha8Rng::seed_from_u64(93);
        let u0 = RotationMatrix::random(3, &mut rng);
        let v0 = RotationMatrix::random(3, &mut rng);
        let sigma = DVector::from_vec(vec![2.0, 2.0, 0.7]);
        let mut scaled = v0.matrix().clone();
        for j in 0..3 {
            for i in 0..3 {
                scaled[(i, j)] *= sigma[j];
            }
        }
        let n = u0.matrix() * scaled.transpose();

        let f1 = SvdFactors::factor(&n).unwrap();

        // Mix the degenerate pair by an in-plane rotation.
        let theta = 0.83f64;
        let (s, c) = theta.sin_cos();
        let mut mix = DMatrix::identity(3, 3);
        mix[(0, 0)] = c;
        mix[(0, 1)] = -s;
        mix[(1, 0)] = s;
        mix[(1, 1)] = c;
        let f2 = SvdFactors::from_raw_parts(
            u0.matrix() * &mix,
            sigma.clone(),
            v0.matrix() * &mix,
        )
        .unwrap();
        let r1 = f1.reconstruct();
        let r2 = f2.reconstruct();
        assert!((&r1 - &r2).abs().max() < 1e-9);

        let c1 = f1.rotation_characterization(1e-9);
        let c2 = f2.rotation_characterization(1e-9);
        assert!(
            (c1 - c2).abs().max() < 1e-9,
            "characterization depends on the chosen SVD"
        );
    }

    #[test]
    fn record_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(94);
        let p = gauss_points(20, 3, &mut rng);
        let q = noisy_rotated_copy(&p, 0.01, &mut rng);
        let coreset = pose_coreset(&p, &q).unwrap();
        let text = coreset.to_json().unwrap();
        let record = CoresetRecord::from_json(&text).unwrap();
        assert_eq!(record.rank, coreset.rank());
        assert_eq!(record.d, 3);
        let ws = record.weight_set().unwrap();
        assert_eq!(ws, *coreset.weights());
    }

    #[test]
    fn normalized_weights_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(95);
        let p = gauss_points(40, 3, &mut rng);
        let q = noisy_rotated_copy(&p, 0.01, &mut rng);
        let coreset = PoseCoresetBuilder::new()
            .normalize(true)
            .build(&p, &q)
            .unwrap();
        assert!((coreset.weights().total_weight() - 1.0).abs() < 1e-9);
        // Scaling leaves the optimal rotation unchanged.
        let raw = pose_coreset(&p, &q).unwrap();
        let r1 = coreset.solve_rotation(&p, &q).unwrap().rotation;
        let r2 = raw.solve_rotation(&p, &q).unwrap().rotation;
        assert!((r1.matrix() - r2.matrix()).abs().max() < 1e-9);
    }
}
