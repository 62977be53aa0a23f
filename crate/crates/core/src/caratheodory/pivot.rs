use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Weights this far below the working scale are snapped to exact zero after a
/// pivot.
pub(crate) const ZERO_CLAMP: f64 = 1e-12;

/// One sparsification pivot over the `active` entries.
///
/// Rewrites `weights[active]` so that the weighted sum and the total weight
/// over `active` are unchanged while at least one active weight becomes
/// exactly zero and none goes negative. Requires `|active| >= dim + 2` so an
/// affine dependence among the points exists.
///
/// The construction centers the active points at their weighted mean, scales
/// each offset to the unit sphere, finds an affine dependence among the unit
/// vectors from the smallest singular direction of their stacked differences,
/// and walks the weights along that dependence until the first one hits zero.
/// A point sitting on the mean is handled analytically: it takes weight zero
/// and the rest are rescaled, which preserves the sum exactly.
pub(crate) fn pivot(
    points: &[DVector<f64>],
    weights: &mut [f64],
    active: &[usize],
) -> Result<()> {
    let k = active.len();
    let dim = points[active[0]].len();
    debug_assert!(k >= dim + 2, "pivot needs at least dim + 2 active entries");

    let total: f64 = active.iter().map(|&i| weights[i]).sum();
    if total <= 0.0 {
        return Err(Error::DegenerateWeights);
    }

    // Weighted mean of the active points.
    let mut mean = DVector::zeros(dim);
    for &i in active {
        mean.axpy(weights[i], &points[i], 1.0);
    }
    mean /= total;

    let offsets: Vec<DVector<f64>> = active.iter().map(|&i| &points[i] - &mean).collect();
    let norms: Vec<f64> = offsets.iter().map(|u| u.norm()).collect();
    let scale = norms.iter().fold(0.0f64, |a, &b| a.max(b));

    // Point coinciding with the mean (or all points identical): zero it and
    // rescale the rest; sum and total weight are preserved by the identity
    // sum_{i != s} w_i x_i * W / (W - w_s) = W * mean when x_s = mean.
    let at_mean = norms
        .iter()
        .position(|&n| n < ZERO_CLAMP * 1.0f64.max(scale));
    if let Some(s) = at_mean {
        let ws = weights[active[s]];
        let rest = total - ws;
        if rest <= 0.0 {
            return Err(Error::DegenerateWeights);
        }
        let factor = total / rest;
        for (pos, &i) in active.iter().enumerate() {
            weights[i] = if pos == s { 0.0 } else { weights[i] * factor };
        }
        return Ok(());
    }

    let units: Vec<DVector<f64>> = offsets
        .iter()
        .zip(&norms)
        .map(|(u, &n)| u / n)
        .collect();
    let zsum: f64 = active
        .iter()
        .enumerate()
        .map(|(pos, &i)| weights[i] * norms[pos])
        .sum();
    let z: Vec<f64> = active
        .iter()
        .enumerate()
        .map(|(pos, &i)| weights[i] * norms[pos] / zsum)
        .collect();

    // Affine dependence h: sum h_i = 0, sum h_i v_i = 0, from the smallest
    // singular direction of the stacked differences v_i - v_0. The smallest
    // eigenpair of M M^T is that direction; with several near-zero singular
    // values any of them is valid, and the argmin pick is deterministic.
    let m = DMatrix::from_fn(k - 1, dim, |r, c| units[r + 1][c] - units[0][c]);
    let gram = &m * m.transpose();
    let eig = gram.symmetric_eigen();
    let mut smallest = 0;
    for j in 1..k - 1 {
        if eig.eigenvalues[j] < eig.eigenvalues[smallest] {
            smallest = j;
        }
    }
    let tail = eig.eigenvectors.column(smallest);

    let mut h = Vec::with_capacity(k);
    h.push(-tail.sum());
    h.extend(tail.iter().copied());

    // Canonical sign: make the first significant entry positive, which also
    // guarantees a positive entry exists for the step-size rule.
    let hmax = h.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if let Some(first) = h.iter().position(|&v| v.abs() > 1e-12 * hmax) {
        if h[first] < 0.0 {
            for v in h.iter_mut() {
                *v = -*v;
            }
        }
    }

    // Largest step keeping all z - alpha h nonnegative; ties zero the
    // smallest index.
    let mut arg = None;
    let mut alpha = f64::INFINITY;
    for (pos, &hi) in h.iter().enumerate() {
        if hi > 0.0 {
            let ratio = z[pos] / hi;
            if ratio < alpha {
                alpha = ratio;
                arg = Some(pos);
            }
        }
    }
    let arg = arg.ok_or_else(|| {
        Error::NumericalContract("pivot found no positive dependence entry".into())
    })?;

    let mut t: Vec<f64> = (0..k).map(|pos| z[pos] - alpha * h[pos]).collect();
    t[arg] = 0.0;
    for v in t.iter_mut() {
        if v.abs() < ZERO_CLAMP {
            *v = 0.0;
        }
    }

    // Undo the unit normalization and restore the total weight.
    let y: Vec<f64> = t.iter().zip(&norms).map(|(&ti, &n)| ti / n).collect();
    let ysum: f64 = y.iter().sum();
    if ysum <= 0.0 {
        return Err(Error::NumericalContract(
            "pivot collapsed all weights".into(),
        ));
    }
    let kappa = total / ysum;
    for (pos, &i) in active.iter().enumerate() {
        weights[i] = y[pos] * kappa;
    }
    Ok(())
}
