use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::geometry::PointSet;

/// Ten coplanar markers in `R^3` (z = 0, rank 2), the synthetic stand-in for
/// a planar marker rig: eight on a ring of diameter one plus two interior
/// points placed asymmetrically.
pub fn planar10() -> PointSet {
    let mut rows = Vec::with_capacity(10);
    for k in 0..8 {
        let angle = k as f64 * std::f64::consts::FRAC_PI_4;
        rows.push(vec![0.5 * angle.cos(), 0.5 * angle.sin(), 0.0]);
    }
    rows.push(vec![0.17, 0.06, 0.0]);
    rows.push(vec![-0.11, -0.21, 0.0]);
    PointSet::from_rows(&rows).expect("static layout is valid")
}

/// `n` Gaussian markers in `R^d`, centered and rescaled so twice the largest
/// centered norm is one — a cheap unit-diameter proxy that stays O(n).
pub fn random_layout<R: Rng>(n: usize, d: usize, rng: &mut R) -> Result<PointSet> {
    let mut m = DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(rng));
    let mut mean = vec![0.0f64; d];
    for i in 0..n {
        for j in 0..d {
            mean[j] += m[(i, j)];
        }
    }
    for v in mean.iter_mut() {
        *v /= n as f64;
    }
    let mut max_norm = 0.0f64;
    for i in 0..n {
        let mut sq = 0.0f64;
        for j in 0..d {
            m[(i, j)] -= mean[j];
            sq += m[(i, j)] * m[(i, j)];
        }
        max_norm = max_norm.max(sq.sqrt());
    }
    if max_norm > 0.0 {
        m /= 2.0 * max_norm;
    }
    PointSet::new(m)
}
