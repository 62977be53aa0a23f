//! Point-set containers, the optimal rotation/translation solver, cost
//! evaluation, and rotation-error metrics.
//!
//! All types are immutable values after construction; every operation here is
//! pure and safe to call from concurrent contexts.

mod kabsch;
mod metrics;
mod motion;
mod point_set;

pub use kabsch::{
    cost, cross_covariance, estimate_pose, kabsch_from_covariance, kabsch_rotation, kabsch_solve,
    KabschSolution, SvdFactors,
};
pub use metrics::{euler_error_deg, euler_zyx_rad, geodesic_deg};
pub use motion::{apply_motion, RigidMotion, RotationMatrix, ROTATION_TOL};
pub use point_set::{centroid, PointSet};
