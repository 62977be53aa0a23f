//! Exact coresets for rigid-body pose estimation.
//!
//! Given two paired marker sets `P` and `Q` (rows of `n x d` matrices), the
//! optimal rotation aligning them is computed by the Kabsch algorithm from
//! the SVD of the cross-covariance matrix. This crate computes a *pose
//! coreset*: a weighted subset of at most `r(d-1)+1` marker pairs (where `r`
//! is the rank of `P`) whose optimal rotation is exactly the optimal rotation
//! of the full pair, and remains so after `Q` is rotated or translated. The
//! construction streams over the input once with memory independent of `n`,
//! using a Caratheodory-type sparsification.
//!
//! Modules:
//! - [`geometry`]: point sets, the Kabsch solver, rigid motions, rotation
//!   error metrics.
//! - [`caratheodory`]: mean/sum-preserving sparsification and the one-pass
//!   streaming reducer.
//! - [`pose_coreset`]: the coreset construction, extraction, and validation.
//! - [`matching`]: nearest-neighbour, assignment, exhaustive matching and
//!   ICP, runnable on full sets or coresets.
//! - [`bench`]: synthetic tracking/timing experiments and report emission.
//!
//! See the `examples/` directory for runnable demos of each capability and
//! the `posebench` binary for the command-line harness.

pub mod bench;
mod seed;
pub mod caratheodory;
mod error;
pub mod geometry;
pub mod matching;
pub mod pose_coreset;

pub use error::{Error, Result};

pub use caratheodory::{
    caratheodory_reduce, sum_coreset, Distribution, StreamingReducer, WeightedIndexSet,
    WeightedVectors,
};
pub use geometry::{
    apply_motion, centroid, cost, estimate_pose, kabsch_rotation, PointSet, RigidMotion,
    RotationMatrix, SvdFactors,
};
pub use matching::{assignment_match, exhaustive_match, icp, nn_match, Correspondence};
pub use pose_coreset::{numerical_rank, PoseCoreset, PoseCoresetBuilder};
