use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// An ordered set of `n` markers in `R^d`, one per row.
///
/// Row order is meaningful: row `i` of one set corresponds to row `i` of its
/// paired set. All entries are finite, `n >= 1`, `d >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    data: DMatrix<f64>,
}

impl PointSet {
    /// Wraps an `n x d` matrix whose rows are markers.
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() == 0 {
            return Err(Error::EmptyInput("point set must have at least one row"));
        }
        if data.ncols() < 2 {
            return Err(Error::InvalidConfig(format!(
                "point sets need dimension >= 2, got {}",
                data.ncols()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("point set entry"));
        }
        Ok(Self { data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("point set must have at least one row"));
        }
        let d = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::DimensionMismatch {
                    context: "point set row",
                    expected: d,
                    got: rows[i].len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    /// Row `i` as a column vector.
    pub fn point(&self, i: usize) -> DVector<f64> {
        self.data.row(i).transpose()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    /// Rows at `indices`, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        for &i in indices {
            if i >= self.n() {
                return Err(Error::StaleCoreset {
                    index: i,
                    n: self.n(),
                });
            }
        }
        let d = self.dim();
        Ok(Self {
            data: DMatrix::from_fn(indices.len(), d, |i, j| self.data[(indices[i], j)]),
        })
    }

    /// Subtracts `center` from every row.
    pub fn translated(&self, center: &DVector<f64>) -> Result<Self> {
        if center.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "translation vector",
                expected: self.dim(),
                got: center.len(),
            });
        }
        let mut data = self.data.clone();
        for mut row in data.row_iter_mut() {
            for j in 0..center.len() {
                row[j] -= center[j];
            }
        }
        Ok(Self { data })
    }

    /// Reads CSV: one row per marker, `d` comma-separated columns, `.` as the
    /// decimal separator, no header.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> = trimmed
                .split(',')
                .map(|tok| tok.trim().parse::<f64>())
                .collect();
            let row = row.map_err(|e| {
                Error::InvalidConfig(format!("csv line {}: {}", lineno + 1, e))
            })?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?)
    }

    pub fn to_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        for i in 0..self.n() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| format!("{}", self.data[(i, j)]))
                .collect();
            writeln!(writer, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// JSON array-of-arrays form, row major.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::Value::Array(
            (0..self.n())
                .map(|i| {
                    serde_json::Value::Array(
                        (0..self.dim())
                            .map(|j| serde_json::json!(self.data[(i, j)]))
                            .collect(),
                    )
                })
                .collect(),
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rows: Vec<Vec<f64>> = serde_json::from_str(text)?;
        Self::from_rows(&rows)
    }
}

/// Weighted centroid `sum(w_i p_i) / sum(w_i)`; uniform weights if `w` is
/// absent.
pub fn centroid(points: &PointSet, weights: Option<&[f64]>) -> Result<DVector<f64>> {
    let n = points.n();
    let d = points.dim();
    let mut acc = DVector::zeros(d);
    let mut total = 0.0;
    match weights {
        None => {
            for i in 0..n {
                acc += points.matrix().row(i).transpose();
            }
            total = n as f64;
        }
        Some(w) => {
            if w.len() != n {
                return Err(Error::WeightLength {
                    expected: n,
                    got: w.len(),
                });
            }
            for (i, &wi) in w.iter().enumerate() {
                if wi < 0.0 {
                    return Err(Error::NegativeWeight {
                        index: i,
                        value: wi,
                    });
                }
                acc += points.matrix().row(i).transpose() * wi;
                total += wi;
            }
        }
    }
    if total <= 0.0 {
        return Err(Error::DegenerateWeights);
    }
    Ok(acc / total)
}
