use crate::error::{Error, Result};
use crate::geometry::RotationMatrix;

/// Geodesic angle between two rotations, in degrees.
///
/// Computed from the relative rotation `R1 R2^T`: `atan2` form in 2-D, the
/// trace formula `acos((tr - 1)/2)` in 3-D (argument clamped to `[-1, 1]`),
/// and the root-sum-square of the principal rotation angles in higher
/// dimensions, which reduces to the former two. Convention-free, unlike
/// Euler differences.
pub fn geodesic_deg(r1: &RotationMatrix, r2: &RotationMatrix) -> Result<f64> {
    if r1.dim() != r2.dim() {
        return Err(Error::DimensionMismatch {
            context: "geodesic rotation pair",
            expected: r1.dim(),
            got: r2.dim(),
        });
    }
    let rel = r1.matrix() * r2.matrix().transpose();
    let d = rel.nrows();
    let angle_rad = match d {
        2 => rel[(1, 0)].atan2(rel[(0, 0)]).abs(),
        3 => {
            // atan2 form of acos((tr - 1)/2): identical value, but well
            // conditioned near zero where acos amplifies roundoff.
            let sin_theta = 0.5
                * ((rel[(2, 1)] - rel[(1, 2)]).powi(2)
                    + (rel[(0, 2)] - rel[(2, 0)]).powi(2)
                    + (rel[(1, 0)] - rel[(0, 1)]).powi(2))
                .sqrt();
            let cos_theta = ((rel.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
            sin_theta.atan2(cos_theta)
        }
        _ => {
            // Each invariant rotation plane contributes cos(theta) twice to
            // the spectrum of the symmetric part, fixed directions
            // contribute 1.
            let sym = (&rel + rel.transpose()) * 0.5;
            let eigs = sym.symmetric_eigen().eigenvalues;
            let sum_sq: f64 = eigs
                .iter()
                .map(|l| {
                    let theta = l.clamp(-1.0, 1.0).acos();
                    theta * theta
                })
                .sum();
            let by_cos = (sum_sq / 2.0).sqrt();
            if by_cos < 1e-4 {
                // Small angles: the skew part carries sin(theta) per plane
                // without the acos conditioning.
                let skew = (&rel - rel.transpose()) * 0.5;
                skew.norm() / std::f64::consts::SQRT_2
            } else {
                by_cos
            }
        }
    };
    Ok(angle_rad.to_degrees())
}

/// Intrinsic ZYX (yaw-pitch-roll) Euler angles of a 3-D rotation, radians.
///
/// `R = Rz(yaw) Ry(pitch) Rx(roll)`. Near the gimbal-lock pitch of +-90
/// degrees the roll is fixed to zero by convention.
pub fn euler_zyx_rad(r: &RotationMatrix) -> Result<[f64; 3]> {
    if r.dim() != 3 {
        return Err(Error::DimensionMismatch {
            context: "euler angles need d = 3",
            expected: 3,
            got: r.dim(),
        });
    }
    let m = r.matrix();
    let sp = (-m[(2, 0)]).clamp(-1.0, 1.0);
    let pitch = sp.asin();
    if sp.abs() > 1.0 - 1e-12 {
        let yaw = (-m[(0, 1)]).atan2(m[(1, 1)]);
        return Ok([yaw, pitch, 0.0]);
    }
    let yaw = m[(1, 0)].atan2(m[(0, 0)]);
    let roll = m[(2, 1)].atan2(m[(2, 2)]);
    Ok([yaw, pitch, roll])
}

fn wrap_deg(mut a: f64) -> f64 {
    while a > 180.0 {
        a -= 360.0;
    }
    while a < -180.0 {
        a += 360.0;
    }
    a
}

/// Per-axis absolute yaw/pitch/roll differences in degrees, under the ZYX
/// intrinsic convention, each wrapped to `[0, 180]`.
pub fn euler_error_deg(r1: &RotationMatrix, r2: &RotationMatrix) -> Result<[f64; 3]> {
    let a = euler_zyx_rad(r1)?;
    let b = euler_zyx_rad(r2)?;
    Ok([
        wrap_deg((a[0] - b[0]).to_degrees()).abs(),
        wrap_deg((a[1] - b[1]).to_degrees()).abs(),
        wrap_deg((a[2] - b[2]).to_degrees()).abs(),
    ])
}
