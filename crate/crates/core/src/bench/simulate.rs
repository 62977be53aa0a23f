use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bench::config::TrialConfig;
use crate::error::Result;
use crate::geometry::{PointSet, RigidMotion, RotationMatrix};
use crate::seed;

/// One simulated observation: the moved (and possibly noisy) marker set and
/// the exact motion that produced it.
#[derive(Debug, Clone)]
pub struct Frame {
    pub index: usize,
    pub q: PointSet,
    pub truth: RigidMotion,
}

/// Generates `Q_t = R_t P + mu_t + noise` per frame: rotation advancing in
/// the first coordinate plane, translation along the normalized all-ones
/// direction, i.i.d. Gaussian noise per coordinate. Deterministic given the
/// config (noise drawn from a seed-derived stream).
pub fn simulate_frames(cfg: &TrialConfig) -> Result<Vec<Frame>> {
    cfg.validate()?;
    let p = cfg.base_points()?;
    let d = p.dim();
    let n = p.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(cfg.seed, 0x4652414d));

    let mut dir = DVector::from_element(d, 1.0);
    dir /= (d as f64).sqrt();

    let mut frames = Vec::with_capacity(cfg.frames);
    for t in 0..cfg.frames {
        let angle = (t as f64 * cfg.trajectory.rot_deg_per_frame).to_radians();
        let rotation = RotationMatrix::plane_rotation(d, 0, 1, angle);
        let translation = &dir * (t as f64 * cfg.trajectory.trans_per_frame);
        let mut q = p.matrix() * rotation.matrix().transpose();
        for mut row in q.row_iter_mut() {
            for j in 0..d {
                row[j] += translation[j];
            }
        }
        if cfg.sigma > 0.0 {
            for i in 0..n {
                for j in 0..d {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    q[(i, j)] += cfg.sigma * g;
                }
            }
        }
        frames.push(Frame {
            index: t,
            q: PointSet::new(q)?,
            truth: RigidMotion::new(rotation, translation)?,
        });
    }
    Ok(frames)
}

/// Q reproduced without noise or motion, for sanity checks.
#[allow(dead_code)]
pub(crate) fn identity_frame(p: &PointSet) -> DMatrix<f64> {
    p.matrix().clone()
}
