use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{centroid, PointSet, RigidMotion, RotationMatrix};

/// A singular value decomposition `U diag(S) V^T` of a `d x d` matrix,
/// with singular values nonnegative and nonincreasing.
///
/// `v` holds the sign-corrected right factor: when the raw factorization has
/// `det(U) det(V) = -1`, the column of `V` paired with the smallest singular
/// value is negated (and `flipped` set) so that `det(U) det(V) = +1`. The
/// rotation `U V^T` built from the corrected pair is then proper. The raw
/// product is recovered by negating the smallest singular value again, which
/// is what [`SvdFactors::reconstruct`] does.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v: DMatrix<f64>,
    pub flipped: bool,
}

impl SvdFactors {
    /// Factors a square matrix, applying the determinant sign correction.
    pub fn factor(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::ShapeMismatch {
                context: "SVD factor target must be square",
                left: (m.nrows(), m.ncols()),
                right: (m.nrows(), m.nrows()),
            });
        }
        let svd = m.clone().svd(true, true);
        let u = svd.u.expect("svd requested u");
        let v = svd.v_t.expect("svd requested v_t").transpose();
        Self::from_raw_parts(u, svd.singular_values, v)
    }

    /// Applies the sign correction to a raw factorization.
    pub fn from_raw_parts(
        u: DMatrix<f64>,
        singular_values: DVector<f64>,
        mut v: DMatrix<f64>,
    ) -> Result<Self> {
        if singular_values.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("singular value"));
        }
        let d = u.nrows();
        let flipped = u.determinant() * v.determinant() < 0.0;
        if flipped {
            for i in 0..d {
                v[(i, d - 1)] = -v[(i, d - 1)];
            }
        }
        Ok(Self {
            u,
            singular_values,
            v,
            flipped,
        })
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    /// The matrix this decomposition was computed from.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut scaled = self.v.clone();
        for j in 0..d {
            let mut s = self.singular_values[j];
            if self.flipped && j == d - 1 {
                s = -s;
            }
            for i in 0..d {
                scaled[(i, j)] *= s;
            }
        }
        &self.u * scaled.transpose()
    }

    /// Number of singular values at least `tol` times the largest.
    pub fn rank(&self, tol: f64) -> usize {
        let top = self.singular_values[0];
        if top <= 0.0 {
            return 0;
        }
        self.singular_values.iter().filter(|&&s| s >= tol * top).count()
    }

    /// The product `V D_r U^T` where `D_r` marks the `r` leading singular
    /// directions. This matrix characterizes the set of optimal rotations
    /// and is independent of which SVD was chosen.
    pub fn rotation_characterization(&self, tol: f64) -> DMatrix<f64> {
        let d = self.dim();
        let r = self.rank(tol);
        let mut acc = DMatrix::zeros(d, d);
        // The correction flag only touches the last column of V; it pairs
        // with the smallest singular value, so for the characterization we
        // must use the raw factor.
        for j in 0..r {
            let mut vj = self.v.column(j).clone_owned();
            if self.flipped && j == d - 1 {
                vj = -vj;
            }
            let uj = self.u.column(j);
            for a in 0..d {
                for b in 0..d {
                    acc[(a, b)] += vj[a] * uj[b];
                }
            }
        }
        acc
    }
}

/// Result of a Kabsch solve with diagnostics.
#[derive(Debug, Clone)]
pub struct KabschSolution {
    pub rotation: RotationMatrix,
    pub factors: SvdFactors,
    /// Set when the cross-covariance was identically zero and the identity
    /// convention was applied.
    pub degenerate: bool,
}

fn validate_pair(p: &PointSet, q: &PointSet) -> Result<()> {
    if p.n() != q.n() || p.dim() != q.dim() {
        return Err(Error::ShapeMismatch {
            context: "paired point sets",
            left: (p.n(), p.dim()),
            right: (q.n(), q.dim()),
        });
    }
    Ok(())
}

fn validate_weights(n: usize, weights: Option<&[f64]>) -> Result<()> {
    if let Some(w) = weights {
        if w.len() != n {
            return Err(Error::WeightLength {
                expected: n,
                got: w.len(),
            });
        }
        for (i, &wi) in w.iter().enumerate() {
            if !wi.is_finite() {
                return Err(Error::NonFinite("weight"));
            }
            if wi < 0.0 {
                return Err(Error::NegativeWeight {
                    index: i,
                    value: wi,
                });
            }
        }
    }
    Ok(())
}

/// The (weighted) cross-covariance `sum_i w_i p_i q_i^T`, a `d x d` matrix.
pub fn cross_covariance(
    p: &PointSet,
    q: &PointSet,
    weights: Option<&[f64]>,
) -> Result<DMatrix<f64>> {
    validate_pair(p, q)?;
    validate_weights(p.n(), weights)?;
    match weights {
        None => Ok(p.matrix().transpose() * q.matrix()),
        Some(w) => {
            let mut scaled = q.matrix().clone();
            for (i, mut row) in scaled.row_iter_mut().enumerate() {
                row *= w[i];
            }
            Ok(p.matrix().transpose() * scaled)
        }
    }
}

/// Solves Wahba's problem: the rotation minimizing
/// `sum_i w_i || p_i - R q_i ||^2`.
///
/// Inputs should already be centered when translation-free optimality is
/// wanted; [`estimate_pose`] does the centering. An identically zero
/// cross-covariance yields the identity rotation with `degenerate` set.
pub fn kabsch_solve(
    p: &PointSet,
    q: &PointSet,
    weights: Option<&[f64]>,
) -> Result<KabschSolution> {
    let m = cross_covariance(p, q, weights)?;
    kabsch_from_covariance(&m)
}

/// Kabsch solve directly from a precomputed cross-covariance.
pub fn kabsch_from_covariance(m: &DMatrix<f64>) -> Result<KabschSolution> {
    let d = m.nrows();
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        let factors = SvdFactors::from_raw_parts(
            DMatrix::identity(d, d),
            DVector::zeros(d),
            DMatrix::identity(d, d),
        )?;
        return Ok(KabschSolution {
            rotation: RotationMatrix::identity(d),
            factors,
            degenerate: true,
        });
    }
    let factors = SvdFactors::factor(m)?;
    // Optimal rotation from the sign-corrected pair. Minimizing
    // sum w ||p - R q||^2 maximizes tr(R * sum w q p^T); with
    // U D V^T = sum w p q^T the maximizer over proper rotations is U V^T
    // after the correction.
    let rotation = RotationMatrix::from_raw(&factors.u * factors.v.transpose());
    Ok(KabschSolution {
        rotation,
        factors,
        degenerate: false,
    })
}

/// Convenience wrapper returning just the optimal rotation.
pub fn kabsch_rotation(
    p: &PointSet,
    q: &PointSet,
    weights: Option<&[f64]>,
) -> Result<RotationMatrix> {
    Ok(kabsch_solve(p, q, weights)?.rotation)
}

/// `sum_i w_i || p_i - (mu + R q_i) ||^2` with `mu = 0` and unit weights by
/// default.
pub fn cost(
    p: &PointSet,
    q: &PointSet,
    rotation: &RotationMatrix,
    mu: Option<&DVector<f64>>,
    weights: Option<&[f64]>,
) -> Result<f64> {
    validate_pair(p, q)?;
    validate_weights(p.n(), weights)?;
    if rotation.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            context: "cost rotation",
            expected: p.dim(),
            got: rotation.dim(),
        });
    }
    if let Some(m) = mu {
        if m.len() != p.dim() {
            return Err(Error::DimensionMismatch {
                context: "cost translation",
                expected: p.dim(),
                got: m.len(),
            });
        }
    }
    let rotated = q.matrix() * rotation.matrix().transpose();
    let mut total = 0.0;
    for i in 0..p.n() {
        let w = weights.map_or(1.0, |w| w[i]);
        let mut sq = 0.0;
        for j in 0..p.dim() {
            let mut diff = p.matrix()[(i, j)] - rotated[(i, j)];
            if let Some(m) = mu {
                diff -= m[j];
            }
            sq += diff * diff;
        }
        total += w * sq;
    }
    Ok(total)
}

/// Minimizes `sum_i w_i || p_i - (mu + R q_i) ||^2` over rotations and
/// translations: centers both sets at their weighted centroids, solves the
/// rotation with Kabsch, and sets `mu = centroid(P) - R centroid(Q)`.
pub fn estimate_pose(
    p: &PointSet,
    q: &PointSet,
    weights: Option<&[f64]>,
) -> Result<RigidMotion> {
    validate_pair(p, q)?;
    let cp = centroid(p, weights)?;
    let cq = centroid(q, weights)?;
    let pc = p.translated(&cp)?;
    let qc = q.translated(&cq)?;
    let rotation = kabsch_rotation(&pc, &qc, weights)?;
    let translation = &cp - rotation.rotate(&cq);
    RigidMotion::new(rotation, translation)
}
