use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::PointSet;

/// Default absolute tolerance on matrix entries for orthogonality and
/// determinant checks.
pub const ROTATION_TOL: f64 = 1e-9;

/// A proper rotation: `d x d`, orthogonal, determinant +1.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationMatrix {
    m: DMatrix<f64>,
}

impl RotationMatrix {
    /// Validates orthogonality (`R^T R = I`) and `det(R) = 1` to `tol`
    /// (max-abs entry deviation).
    pub fn with_tolerance(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::ShapeMismatch {
                context: "rotation matrix must be square",
                left: (m.nrows(), m.ncols()),
                right: (m.nrows(), m.nrows()),
            });
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("rotation matrix entry"));
        }
        let d = m.nrows();
        let gram = m.transpose() * &m;
        let mut dev: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((gram[(i, j)] - target).abs());
            }
        }
        if dev > tol {
            return Err(Error::NumericalContract(format!(
                "matrix is not orthogonal: max |R^T R - I| = {dev:.3e} > {tol:.1e}"
            )));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > tol {
            return Err(Error::NumericalContract(format!(
                "matrix is not a proper rotation: det = {det:.12} (expected 1)"
            )));
        }
        Ok(Self { m })
    }

    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(m, ROTATION_TOL)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            m: DMatrix::identity(d, d),
        }
    }

    /// Planar rotation by `angle_rad` in the (axis_a, axis_b) coordinate
    /// plane; identity elsewhere. Works in any dimension.
    pub fn plane_rotation(d: usize, axis_a: usize, axis_b: usize, angle_rad: f64) -> Self {
        let mut m = DMatrix::identity(d, d);
        let (s, c) = angle_rad.sin_cos();
        m[(axis_a, axis_a)] = c;
        m[(axis_b, axis_b)] = c;
        m[(axis_a, axis_b)] = -s;
        m[(axis_b, axis_a)] = s;
        Self { m }
    }

    /// Haar-distributed random rotation: QR of a Gaussian matrix with the
    /// sign convention fixed, then a column flip to force det +1.
    pub fn random<R: Rng>(d: usize, rng: &mut R) -> Self {
        let g: DMatrix<f64> = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(rng));
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..d {
            if r[(j, j)] < 0.0 {
                for i in 0..d {
                    q[(i, j)] = -q[(i, j)];
                }
            }
        }
        if q.determinant() < 0.0 {
            for i in 0..d {
                q[(i, d - 1)] = -q[(i, d - 1)];
            }
        }
        Self { m: q }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn transpose(&self) -> Self {
        Self {
            m: self.m.transpose(),
        }
    }

    /// `self * other`.
    pub fn compose(&self, other: &RotationMatrix) -> Self {
        Self {
            m: &self.m * &other.m,
        }
    }

    pub fn rotate(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.m * v
    }

    /// Wraps a matrix that is rotation-like by construction, skipping
    /// validation. Callers guarantee the invariants.
    pub(crate) fn from_raw(m: DMatrix<f64>) -> Self {
        Self { m }
    }
}

/// A rigid motion `q -> R q + t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidMotion {
    pub rotation: RotationMatrix,
    pub translation: DVector<f64>,
}

impl RigidMotion {
    pub fn new(rotation: RotationMatrix, translation: DVector<f64>) -> Result<Self> {
        if translation.len() != rotation.dim() {
            return Err(Error::DimensionMismatch {
                context: "rigid motion translation",
                expected: rotation.dim(),
                got: translation.len(),
            });
        }
        if translation.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("translation entry"));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            rotation: RotationMatrix::identity(d),
            translation: DVector::zeros(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.rotation.dim()
    }

    pub fn transform(&self, q: &DVector<f64>) -> DVector<f64> {
        self.rotation.rotate(q) + &self.translation
    }

    /// The motion `x -> R^T (x - t)` undoing this one.
    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        let t = -(rt.rotate(&self.translation));
        Self {
            rotation: rt,
            translation: t,
        }
    }

    /// `self` after `other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &RigidMotion) -> Self {
        Self {
            rotation: self.rotation.compose(&other.rotation),
            translation: self.rotation.rotate(&other.translation) + &self.translation,
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let d = self.dim();
        serde_json::json!({
            "rotation": (0..d).map(|i| (0..d).map(|j| self.rotation.matrix()[(i, j)]).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "translation": self.translation.as_slice(),
        })
    }
}

/// Applies a rigid motion to every row: `row_i -> R q_i + t`.
pub fn apply_motion(points: &PointSet, motion: &RigidMotion) -> Result<PointSet> {
    if points.dim() != motion.dim() {
        return Err(Error::DimensionMismatch {
            context: "apply_motion",
            expected: points.dim(),
            got: motion.dim(),
        });
    }
    // Rows transform as q^T R^T + t^T.
    let mut out = points.matrix() * motion.rotation.matrix().transpose();
    for mut row in out.row_iter_mut() {
        for j in 0..motion.translation.len() {
            row[j] += motion.translation[j];
        }
    }
    PointSet::new(out)
}
