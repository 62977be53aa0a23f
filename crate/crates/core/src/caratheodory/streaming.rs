use std::collections::BTreeMap;

use nalgebra::DVector;

use crate::caratheodory::chunked::ChunkedBuffer;
use crate::caratheodory::{reduce_entries_in_place, SMALL_DIM_LIMIT};
use crate::error::{Error, Result};

/// Sparse nonnegative weights over original row indices.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedIndexSet {
    entries: BTreeMap<usize, f64>,
}

impl WeightedIndexSet {
    pub fn from_pairs<I: IntoIterator<Item = (usize, f64)>>(pairs: I) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (index, weight) in pairs {
            if !weight.is_finite() {
                return Err(Error::NonFinite("coreset weight"));
            }
            if weight <= 0.0 {
                return Err(Error::NumericalContract(format!(
                    "weighted index set requires strictly positive weights, got {weight} at {index}"
                )));
            }
            if entries.insert(index, weight).is_some() {
                return Err(Error::NumericalContract(format!(
                    "duplicate index {index} in weighted index set"
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.entries.get(&index).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&i, &w)| (i, w))
    }

    pub fn indices(&self) -> Vec<usize> {
        self.entries.keys().copied().collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.entries.values().copied().collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.values().sum()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    /// Rescales all weights by a positive factor; any positive scaling keeps
    /// the same optimal rotation.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::NumericalContract(format!(
                "scale factor must be positive and finite, got {factor}"
            )));
        }
        Ok(Self {
            entries: self.entries.iter().map(|(&i, &w)| (i, w * factor)).collect(),
        })
    }
}

/// How a [`StreamingReducer`] compresses its buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReducerStrategy {
    /// Compress as soon as the buffer reaches `d' + 2` entries: one pivot per
    /// insertion. The reference behaviour.
    PerInsert,
    /// Collect up to `chunk` pending points, then eliminate them against one
    /// factorization of the survivor block. Same contracts, much cheaper for
    /// large `d'`.
    Chunked { chunk: usize },
}

impl ReducerStrategy {
    /// Per-insertion pivots up to [`SMALL_DIM_LIMIT`], chunked beyond.
    pub fn auto(dim: usize) -> Self {
        if dim <= SMALL_DIM_LIMIT {
            ReducerStrategy::PerInsert
        } else {
            ReducerStrategy::Chunked { chunk: 256 }
        }
    }
}

enum State {
    PerInsert {
        indices: Vec<usize>,
        weights: Vec<f64>,
        points: Vec<DVector<f64>>,
    },
    Chunked(ChunkedBuffer),
}

/// One-pass sum-preserving reduction of a vector stream.
///
/// Holds at most `d' + 1` weighted `(index, vector)` entries between
/// insertions (per-insert strategy); the retained weighted sum equals the sum
/// of everything inserted, up to floating-point drift. Single writer;
/// distinct reducers may run in parallel and be combined with
/// [`StreamingReducer::merge`].
pub struct StreamingReducer {
    dim: usize,
    inserted: usize,
    strategy: ReducerStrategy,
    state: State,
}

impl StreamingReducer {
    pub fn new(dim: usize) -> Self {
        Self::with_strategy(dim, ReducerStrategy::auto(dim))
    }

    pub fn with_strategy(dim: usize, strategy: ReducerStrategy) -> Self {
        let state = match strategy {
            ReducerStrategy::PerInsert => State::PerInsert {
                indices: Vec::with_capacity(dim + 2),
                weights: Vec::with_capacity(dim + 2),
                points: Vec::with_capacity(dim + 2),
            },
            ReducerStrategy::Chunked { chunk } => State::Chunked(ChunkedBuffer::new(dim, chunk)),
        };
        Self {
            dim,
            inserted: 0,
            strategy,
            state,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inserted(&self) -> usize {
        self.inserted
    }

    /// Number of entries currently retained.
    pub fn buffered(&self) -> usize {
        match &self.state {
            State::PerInsert { weights, .. } => weights.len(),
            State::Chunked(buf) => buf.len(),
        }
    }

    pub fn insert(&mut self, index: usize, point: DVector<f64>) -> Result<()> {
        self.insert_weighted(index, 1.0, point)
    }

    pub fn insert_weighted(&mut self, index: usize, weight: f64, point: DVector<f64>) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "reducer insert",
                expected: self.dim,
                got: point.len(),
            });
        }
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::NegativeWeight {
                index,
                value: weight,
            });
        }
        self.inserted += 1;
        match &mut self.state {
            State::PerInsert {
                indices,
                weights,
                points,
            } => {
                indices.push(index);
                weights.push(weight);
                points.push(point);
                if weights.len() == self.dim + 2 {
                    reduce_entries_in_place(points, weights)?;
                    let mut keep = 0usize;
                    for j in 0..weights.len() {
                        if weights[j] > 0.0 {
                            if keep != j {
                                indices[keep] = indices[j];
                                weights[keep] = weights[j];
                                points.swap(keep, j);
                            }
                            keep += 1;
                        }
                    }
                    indices.truncate(keep);
                    weights.truncate(keep);
                    points.truncate(keep);
                }
                Ok(())
            }
            State::Chunked(buf) => buf.push(index, weight, &point),
        }
    }

    fn drain_entries(self) -> Result<Vec<(usize, f64, DVector<f64>)>> {
        match self.state {
            State::PerInsert {
                indices,
                weights,
                points,
            } => Ok(indices
                .into_iter()
                .zip(weights)
                .zip(points)
                .map(|((i, w), p)| (i, w, p))
                .collect()),
            State::Chunked(mut buf) => {
                buf.flush()?;
                Ok(buf.entries().collect())
            }
        }
    }

    /// Combines two streams; the result carries `self`'s strategy and its
    /// weighted sum is the sum of both inputs'.
    pub fn merge(self, other: StreamingReducer) -> Result<StreamingReducer> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                context: "reducer merge",
                expected: self.dim,
                got: other.dim,
            });
        }
        let dim = self.dim;
        let strategy = self.strategy;
        let inserted = self.inserted + other.inserted;
        let mut entries = self.drain_entries()?;
        entries.extend(other.drain_entries()?);

        if entries.len() > dim + 1 {
            let mut weights: Vec<f64> = entries.iter().map(|e| e.1).collect();
            let points: Vec<DVector<f64>> = entries.iter().map(|e| e.2.clone()).collect();
            reduce_entries_in_place(&points, &mut weights)?;
            entries = entries
                .into_iter()
                .zip(weights)
                .filter(|(_, w)| *w > 0.0)
                .map(|((i, _, p), w)| (i, w, p))
                .collect();
        }

        let mut merged = StreamingReducer::with_strategy(dim, strategy);
        merged.inserted = inserted;
        match &mut merged.state {
            State::PerInsert {
                indices,
                weights,
                points,
            } => {
                for (i, w, p) in entries {
                    indices.push(i);
                    weights.push(w);
                    points.push(p);
                }
            }
            State::Chunked(buf) => {
                for (i, w, p) in entries {
                    buf.push(i, w, &p)?;
                }
            }
        }
        Ok(merged)
    }

    /// Flushes and returns the retained sparse weights: at most `d' + 1`
    /// strictly positive entries keyed by original insertion index.
    pub fn finalize(self) -> Result<WeightedIndexSet> {
        if self.inserted == 0 {
            return Err(Error::EmptyInput("reducer finalize before any insertion"));
        }
        let dim = self.dim;
        let entries = self.drain_entries()?;
        let wmax = entries.iter().fold(0.0f64, |a, e| a.max(e.1));
        let kept: Vec<(usize, f64)> = entries
            .into_iter()
            .filter(|(_, w, _)| *w > 1e-12 * wmax)
            .map(|(i, w, _)| (i, w))
            .collect();
        if kept.len() > dim + 1 {
            return Err(Error::NumericalContract(format!(
                "reducer retained {} entries, bound is {}",
                kept.len(),
                dim + 1
            )));
        }
        WeightedIndexSet::from_pairs(kept)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gauss(dim: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
        DVector::from_fn(dim, |_, _| StandardNormal.sample(rng))
    }

    #[test]
    fn no_compression_below_capacity() {
        let dim = 4;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut red = StreamingReducer::new(dim);
        for i in 0..dim + 1 {
            red.insert(i, gauss(dim, &mut rng)).unwrap();
        }
        assert_eq!(red.buffered(), dim + 1);
        let w = red.finalize().unwrap();
        assert_eq!(w.len(), dim + 1);
        for (_, weight) in w.iter() {
            assert_eq!(weight, 1.0);
        }
    }

    #[test]
    fn overflow_compresses_once() {
        let dim = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let mut red = StreamingReducer::new(dim);
        for i in 0..dim + 2 {
            red.insert(i, gauss(dim, &mut rng)).unwrap();
        }
        assert!(red.buffered() <= dim + 1, "one pivot must zero an entry");
    }

    #[test]
    fn hundred_vectors_keep_running_sum() {
        let dim = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut red = StreamingReducer::new(dim);
        let mut exact = DVector::<f64>::zeros(dim);
        let points: Vec<DVector<f64>> = (0..100).map(|_| gauss(dim, &mut rng)).collect();
        for (i, p) in points.iter().enumerate() {
            exact += p;
            red.insert(i, p.clone()).unwrap();
        }
        let w = red.finalize().unwrap();
        assert!(w.len() <= dim + 1);
        let mut kept = DVector::<f64>::zeros(dim);
        for (i, weight) in w.iter() {
            kept.axpy(weight, &points[i], 1.0);
        }
        assert!((kept - exact).norm() < 1e-8 * (1.0 + 100.0));
    }

    #[test]
    fn merge_with_empty_is_identity() {
        let dim = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let mut red = StreamingReducer::new(dim);
        let points: Vec<DVector<f64>> = (0..20).map(|_| gauss(dim, &mut rng)).collect();
        for (i, p) in points.iter().enumerate() {
            red.insert(i, p.clone()).unwrap();
        }
        let empty = StreamingReducer::new(dim);
        let merged = red.merge(empty).unwrap();
        let w = merged.finalize().unwrap();
        let mut kept = DVector::<f64>::zeros(dim);
        for (i, weight) in w.iter() {
            kept.axpy(weight, &points[i], 1.0);
        }
        let exact: DVector<f64> = points.iter().fold(DVector::zeros(dim), |a, p| a + p);
        assert!((kept - &exact).norm() < 1e-9 * (1.0 + exact.norm()));
    }

    #[test]
    fn split_merge_matches_sequential() {
        let dim = 4;
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let points: Vec<DVector<f64>> = (0..200).map(|_| gauss(dim, &mut rng)).collect();
        let exact: DVector<f64> = points.iter().fold(DVector::zeros(dim), |a, p| a + p);

        let mut left = StreamingReducer::new(dim);
        let mut right = StreamingReducer::new(dim);
        for (i, p) in points.iter().enumerate() {
            if i < 100 {
                left.insert(i, p.clone()).unwrap();
            } else {
                right.insert(i, p.clone()).unwrap();
            }
        }
        let merged = left.merge(right).unwrap().finalize().unwrap();
        let mut kept = DVector::<f64>::zeros(dim);
        for (i, weight) in merged.iter() {
            kept.axpy(weight, &points[i], 1.0);
        }
        assert!((kept - exact).norm() < 1e-8 * (1.0 + 200.0));
    }

    #[test]
    fn four_way_tree_merge_matches_sequential() {
        let dim = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let points: Vec<DVector<f64>> = (0..400).map(|_| gauss(dim, &mut rng)).collect();
        let exact: DVector<f64> = points.iter().fold(DVector::zeros(dim), |a, p| a + p);

        let mut parts: Vec<StreamingReducer> = Vec::new();
        for chunk in 0..4 {
            let mut red = StreamingReducer::new(dim);
            for i in chunk * 100..(chunk + 1) * 100 {
                red.insert(i, points[i].clone()).unwrap();
            }
            parts.push(red);
        }
        let ab = parts.remove(0).merge(parts.remove(0)).unwrap();
        let cd = parts.remove(0).merge(parts.remove(0)).unwrap();
        let all = ab.merge(cd).unwrap().finalize().unwrap();
        let mut kept = DVector::<f64>::zeros(dim);
        for (i, weight) in all.iter() {
            kept.axpy(weight, &points[i], 1.0);
        }
        assert!((kept - exact).norm() < 1e-8 * (1.0 + 400.0));
    }

    #[test]
    fn finalize_empty_errors() {
        let red = StreamingReducer::new(3);
        assert!(matches!(
            red.finalize(),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let mut red = StreamingReducer::new(3);
        assert!(red.insert(0, DVector::zeros(4)).is_err());
    }

    #[test]
    fn chunked_strategy_same_contract() {
        let dim = 5;
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let points: Vec<DVector<f64>> = (0..300).map(|_| gauss(dim, &mut rng)).collect();
        let exact: DVector<f64> = points.iter().fold(DVector::zeros(dim), |a, p| a + p);
        let mut red =
            StreamingReducer::with_strategy(dim, ReducerStrategy::Chunked { chunk: 32 });
        for (i, p) in points.iter().enumerate() {
            red.insert(i, p.clone()).unwrap();
        }
        let w = red.finalize().unwrap();
        assert!(w.len() <= dim + 1);
        let mut kept = DVector::<f64>::zeros(dim);
        for (i, weight) in w.iter() {
            kept.axpy(weight, &points[i], 1.0);
        }
        assert!((kept - exact).norm() < 1e-8 * (1.0 + 300.0));
    }
}
