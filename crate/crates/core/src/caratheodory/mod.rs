//! Mean/sum-preserving sparsification of vector sets and the one-pass
//! streaming reducer built on it.
//!
//! Any point in the convex hull of a set in `R^{d'}` is a convex combination
//! of at most `d' + 1` of its points. The operations here make that
//! constructive and numerical: [`sum_coreset`] rewrites the uniform weights
//! of exactly `d' + 2` vectors so the weighted sum equals the mean while one
//! weight drops to zero, [`caratheodory_reduce`] iterates that pivot on a
//! weighted set until at most `d' + 1` entries remain, and
//! [`StreamingReducer`] applies one pivot per insertion to summarize a stream
//! with memory independent of its length.

mod chunked;
mod pivot;
mod streaming;

use nalgebra::DVector;

use crate::error::{Error, Result};

pub use streaming::{ReducerStrategy, StreamingReducer, WeightedIndexSet};

/// Largest ambient dimension handled by the per-insertion pivot before the
/// chunked strategy takes over by default.
pub const SMALL_DIM_LIMIT: usize = 64;

/// A vector of nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    weights: Vec<f64>,
}

impl Distribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let mut total = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFinite("distribution weight"));
            }
            if w < 0.0 {
                return Err(Error::NegativeWeight { index: i, value: w });
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::NumericalContract(format!(
                "distribution weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Number of strictly positive entries.
    pub fn sparsity(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }
}

/// Weighted points in `R^{d'}`; weights are nonnegative but need not sum to
/// one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedVectors {
    points: Vec<DVector<f64>>,
    weights: Vec<f64>,
}

impl WeightedVectors {
    pub fn new(points: Vec<DVector<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("weighted vectors"));
        }
        if points.len() != weights.len() {
            return Err(Error::WeightLength {
                expected: points.len(),
                got: weights.len(),
            });
        }
        let dim = points[0].len();
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "weighted vectors",
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("weighted vector entry"));
            }
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFinite("weight"));
            }
            if w < 0.0 {
                return Err(Error::NegativeWeight { index: i, value: w });
            }
        }
        Ok(Self { points, weights })
    }

    pub fn uniform(points: Vec<DVector<f64>>) -> Result<Self> {
        let weights = vec![1.0; points.len()];
        Self::new(points, weights)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn weighted_sum(&self) -> DVector<f64> {
        let mut acc = DVector::zeros(self.dim());
        for (p, &w) in self.points.iter().zip(&self.weights) {
            acc.axpy(w, p, 1.0);
        }
        acc
    }
}

/// Reassigns the uniform weights of exactly `d' + 2` vectors in `R^{d'}` so
/// that `sum t_i b_i = mean(b)` with `sum t_i = 1`, all `t_i >= 0`, and at
/// least one `t_i` exactly zero.
pub fn sum_coreset(vectors: &[DVector<f64>]) -> Result<Distribution> {
    if vectors.is_empty() {
        return Err(Error::EmptyInput("sum_coreset"));
    }
    let dim = vectors[0].len();
    if vectors.len() != dim + 2 {
        return Err(Error::ArityMismatch {
            dim,
            expected: dim + 2,
            got: vectors.len(),
        });
    }
    for v in vectors {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                context: "sum_coreset vector",
                expected: dim,
                got: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("sum_coreset vector entry"));
        }
    }
    let k = vectors.len();
    let mut weights = vec![1.0 / k as f64; k];
    let active: Vec<usize> = (0..k).collect();
    pivot::pivot(vectors, &mut weights, &active)?;
    // The pivot preserves the total exactly in exact arithmetic; renormalize
    // the few ulps of drift so the distribution invariant is strict.
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    Distribution::new(weights)
}

/// Pivots `weights` in place until at most `dim + 1` entries are positive,
/// preserving the weighted sum and the total weight.
pub(crate) fn reduce_entries_in_place(
    points: &[DVector<f64>],
    weights: &mut [f64],
) -> Result<()> {
    let dim = points[0].len();
    if dim <= SMALL_DIM_LIMIT {
        loop {
            let active: Vec<usize> = weights
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > 0.0)
                .map(|(i, _)| i)
                .take(dim + 2)
                .collect();
            if active.len() < dim + 2 {
                return Ok(());
            }
            pivot::pivot(points, weights, &active)?;
        }
    }
    // Large ambient dimension: batch elimination against one factorization.
    let mut buf = chunked::ChunkedBuffer::new(dim, points.len().min(1024));
    for (i, (p, &w)) in points.iter().zip(weights.iter()).enumerate() {
        if w > 0.0 {
            buf.push(i, w, p)?;
        }
    }
    buf.flush()?;
    for w in weights.iter_mut() {
        *w = 0.0;
    }
    for (i, w, _) in buf.entries() {
        weights[i] = w;
    }
    Ok(())
}

/// Sum-preserving reduction of a weighted set to at most `d' + 1` of its
/// points.
///
/// The output's weighted sum and total weight match the input's within
/// floating-point drift; indices into the input are reported alongside.
/// Inputs with at most `d' + 1` entries are returned unchanged.
pub fn reduce_indexed(set: &WeightedVectors) -> Result<(WeightedVectors, Vec<usize>)> {
    let dim = set.dim();
    if set.len() <= dim + 1 {
        return Ok((set.clone(), (0..set.len()).collect()));
    }
    let total = set.total_weight();
    if total <= 0.0 {
        return Err(Error::DegenerateWeights);
    }
    // Normalize to a distribution, pivot until sparse, rescale back.
    let mut weights: Vec<f64> = set.weights().iter().map(|w| w / total).collect();
    reduce_entries_in_place(set.points(), &mut weights)?;
    let mut points = Vec::new();
    let mut kept_weights = Vec::new();
    let mut kept_indices = Vec::new();
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            points.push(set.points()[i].clone());
            kept_weights.push(w * total);
            kept_indices.push(i);
        }
    }
    Ok((WeightedVectors::new(points, kept_weights)?, kept_indices))
}

/// See [`reduce_indexed`]; drops the index report.
pub fn caratheodory_reduce(set: &WeightedVectors) -> Result<WeightedVectors> {
    Ok(reduce_indexed(set)?.0)
}
