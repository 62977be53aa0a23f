//! Batch sparsification for large ambient dimensions.
//!
//! The per-insertion pivot factors a `(d'+1) x d'` matrix for every
//! compression, which is fine for small `d'` but cubic work per point. This
//! buffer instead collects a chunk of pending points, factors the survivor
//! block once, derives one affine-dependence (kernel) vector per pending
//! point from that single factorization, and then performs the same
//! weight-walking pivots entirely inside the kernel space. Contracts match
//! the per-insertion path: the lifted weighted sum is preserved, no weight
//! goes negative, and at most `d'+1` entries survive a flush.

use faer::linalg::matmul::matmul;
use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Accum, Mat, Par};
use nalgebra::DVector;

use crate::error::{Error, Result};

/// Relative residual above which a flush is rejected outright.
const RESIDUAL_FAIL: f64 = 1e-8;
/// Residual target for the iterative refinement of kernel vectors.
const RESIDUAL_TARGET: f64 = 1e-12;
const MAX_REFINE: usize = 4;
const MAX_FLUSH_RETRIES: usize = 3;

pub(crate) struct ChunkedBuffer {
    dim: usize,
    /// Lifted row count `d' + 1`; the trailing row is the weight tally.
    rows: usize,
    capacity: usize,
    cols: Mat<f64>,
    weights: Vec<f64>,
    indices: Vec<usize>,
    /// Exact running tally of `sum w_i (x_i, 1)` over everything inserted.
    tally: Vec<f64>,
    tally_scale: f64,
}

impl ChunkedBuffer {
    pub fn new(dim: usize, chunk: usize) -> Self {
        let rows = dim + 1;
        let capacity = rows + chunk.max(1);
        Self {
            dim,
            rows,
            capacity,
            cols: Mat::zeros(rows, capacity),
            weights: Vec::with_capacity(capacity),
            indices: Vec::with_capacity(capacity),
            tally: vec![0.0; rows],
            tally_scale: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }


    /// Appends a weighted point; flushes first if the buffer is full.
    pub fn push(&mut self, index: usize, weight: f64, point: &DVector<f64>) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "reducer insert",
                expected: self.dim,
                got: point.len(),
            });
        }
        if self.len() == self.capacity {
            self.flush()?;
        }
        let at = self.len();
        let mut norm1 = 0.0;
        for (r, &v) in point.iter().enumerate() {
            self.cols[(r, at)] = v;
            self.tally[r] += weight * v;
            norm1 += v.abs();
        }
        self.cols[(self.rows - 1, at)] = 1.0;
        self.tally[self.rows - 1] += weight;
        self.tally_scale += weight.abs() * (norm1 + 1.0);
        self.weights.push(weight);
        self.indices.push(index);
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, f64, DVector<f64>)> + '_ {
        (0..self.len()).map(move |c| {
            let point = DVector::from_fn(self.dim, |r, _| self.cols[(r, c)]);
            (self.indices[c], self.weights[c], point)
        })
    }

    /// Reduces the buffer to at most `d' + 1` positively weighted columns.
    pub fn flush(&mut self) -> Result<()> {
        for attempt in 0..MAX_FLUSH_RETRIES {
            if self.len() <= self.rows {
                return Ok(());
            }
            let deferred = self.flush_once()?;
            self.compact();
            if !deferred {
                break;
            }
            if attempt + 1 == MAX_FLUSH_RETRIES {
                return Err(Error::NumericalContract(
                    "chunked reducer could not eliminate degenerate pending points".into(),
                ));
            }
        }
        if self.len() > self.rows {
            return Err(Error::NumericalContract(format!(
                "chunked reducer retained {} entries, bound is {}",
                self.len(),
                self.rows
            )));
        }
        self.verify_tally()
    }

    /// One factorization + elimination pass. Returns whether any pending
    /// point was deferred by a degenerate kernel vector.
    fn flush_once(&mut self) -> Result<bool> {
        let k = self.rows;
        let len = self.len();
        let c = len - k;
        let survivors = self.cols.as_ref().submatrix(0, 0, k, k);
        let pending = self.cols.as_ref().submatrix(0, k, k, c);

        let entry_scale = 1.0f64.max(
            (0..len)
                .map(|j| (0..k).map(|i| self.cols[(i, j)].abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max),
        );

        // Kernel coefficients: survivors * gamma = pending, from one
        // factorization of the square survivor block, refined so each kernel
        // vector is a dependence to near machine precision.
        let lu = PartialPivLu::new(survivors);
        let mut gamma = lu.solve(&pending.to_owned());
        if gamma.as_ref().col_iter().flat_map(|c| c.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NumericalContract(
                "survivor block is numerically singular".into(),
            ));
        }
        let residual = |gamma: &Mat<f64>| -> (Mat<f64>, f64) {
            let mut resid = pending.to_owned();
            matmul(
                resid.as_mut(),
                Accum::Add,
                survivors,
                gamma.as_ref(),
                -1.0,
                Par::Seq,
            );
            let max_res = (0..c)
                .map(|j| (0..k).map(|i| resid[(i, j)].abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            (resid, max_res)
        };
        let mut max_res = f64::INFINITY;
        for _ in 0..MAX_REFINE {
            let (resid, res_now) = residual(&gamma);
            max_res = res_now;
            if max_res <= RESIDUAL_TARGET * entry_scale {
                break;
            }
            let corr = lu.solve(&resid);
            for j in 0..c {
                for i in 0..k {
                    gamma[(i, j)] += corr[(i, j)];
                }
            }
        }
        if max_res > RESIDUAL_TARGET * entry_scale {
            max_res = residual(&gamma).1;
            if max_res > RESIDUAL_FAIL * entry_scale {
                return Err(Error::NumericalContract(format!(
                    "kernel residual {max_res:.3e} exceeds tolerance at scale {entry_scale:.3e}"
                )));
            }
        }

        // Dense kernel matrix over all len coordinates, one column per
        // pending point: gamma stacked over survivors, -1 at the point's own
        // slot.
        let stride = len;
        let mut kernel = vec![0.0f64; stride * c];
        for j in 0..c {
            let col = &mut kernel[j * stride..(j + 1) * stride];
            for i in 0..k {
                col[i] = gamma[(i, j)];
            }
            col[k + j] = -1.0;
        }

        let wscale = self
            .weights
            .iter()
            .fold(0.0f64, |a, &b| a.max(b.abs()))
            .max(1.0);
        let mut deferred = false;
        for j in 0..c {
            let (done, rest) = kernel.split_at_mut((j + 1) * stride);
            let col = &mut done[j * stride..];
            let colmax = col.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            if colmax < 1e-13 {
                deferred = true;
                continue;
            }
            if !col.iter().any(|&v| v > 0.0) {
                for v in col.iter_mut() {
                    *v = -*v;
                }
            }
            let mut arg = None;
            let mut alpha = f64::INFINITY;
            for (i, &ci) in col.iter().enumerate() {
                if ci > 0.0 {
                    let ratio = self.weights[i] / ci;
                    if ratio < alpha {
                        alpha = ratio;
                        arg = Some(i);
                    }
                }
            }
            let Some(z) = arg else {
                deferred = true;
                continue;
            };
            for (i, &ci) in col.iter().enumerate() {
                if ci != 0.0 {
                    let w = self.weights[i] - alpha * ci;
                    self.weights[i] = if w < 0.0 {
                        if w < -1e-9 * wscale {
                            return Err(Error::NumericalContract(format!(
                                "pivot drove weight {i} to {w:.3e}"
                            )));
                        }
                        0.0
                    } else {
                        w
                    };
                }
            }
            self.weights[z] = 0.0;
            // Eliminate the dead coordinate from the remaining kernel
            // vectors so later pivots cannot touch it.
            let cz = col[z];
            for jr in 0..c - j - 1 {
                let other = &mut rest[jr * stride..(jr + 1) * stride];
                let f = other[z] / cz;
                if f != 0.0 {
                    for (o, &ci) in other.iter_mut().zip(col.iter()) {
                        *o -= f * ci;
                    }
                    other[z] = 0.0;
                }
            }
        }
        Ok(deferred)
    }

    fn compact(&mut self) {
        let len = self.len();
        let mut keep = 0usize;
        for j in 0..len {
            if self.weights[j] > 0.0 {
                if keep != j {
                    for r in 0..self.rows {
                        self.cols[(r, keep)] = self.cols[(r, j)];
                    }
                    self.weights[keep] = self.weights[j];
                    self.indices[keep] = self.indices[j];
                }
                keep += 1;
            }
        }
        self.weights.truncate(keep);
        self.indices.truncate(keep);
    }

    fn verify_tally(&self) -> Result<()> {
        let len = self.len();
        let mut recomputed = vec![0.0f64; self.rows];
        for j in 0..len {
            let w = self.weights[j];
            for r in 0..self.rows {
                recomputed[r] += w * self.cols[(r, j)];
            }
        }
        let err: f64 = recomputed
            .iter()
            .zip(&self.tally)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if err > RESIDUAL_FAIL * (1.0 + self.tally_scale) {
            return Err(Error::NumericalContract(format!(
                "retained weighted sum drifted by {err:.3e} (scale {:.3e})",
                self.tally_scale
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn chunked_matches_running_sum() {
        let dim = 12;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut buf = ChunkedBuffer::new(dim, 16);
        let mut exact = DVector::<f64>::zeros(dim);
        let mut total = 0.0;
        for i in 0..500 {
            let x = DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
            let w = 0.5 + (i % 3) as f64;
            exact.axpy(w, &x, 1.0);
            total += w;
            buf.push(i, w, &x).unwrap();
        }
        buf.flush().unwrap();
        assert!(buf.len() <= dim + 1);
        let mut kept = DVector::<f64>::zeros(dim);
        let mut kept_total = 0.0;
        for (_, w, x) in buf.entries() {
            assert!(w > 0.0);
            kept.axpy(w, &x, 1.0);
            kept_total += w;
        }
        assert!((kept - exact).norm() < 1e-8 * (1.0 + total));
        assert!((kept_total - total).abs() < 1e-8 * (1.0 + total));
    }
}
