use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `p x n` data matrix whose columns are observations.
///
/// Stored column-major so each observation is a contiguous slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMatrix {
    p: usize,
    n: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    /// `values` holds the columns back to back.
    pub fn from_column_major(p: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        if p == 0 || n == 0 {
            return Err(Error::InvalidParameter(format!(
                "data matrix must be non-empty, got {p} x {n}"
            )));
        }
        if values.len() != p * n {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: p * n,
            });
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite entry at variable {}, observation {}",
                idx % p,
                idx / p
            )));
        }
        Ok(Self { p, n, values })
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let n = columns.len();
        let p = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != p) {
            return Err(Error::LengthMismatch {
                left: bad.len(),
                right: p,
            });
        }
        Self::from_column_major(p, n, columns.concat())
    }

    /// Builds from `rows[i][k]` = variable `i` of observation `k`.
    pub fn from_variable_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::LengthMismatch {
                left: bad.len(),
                right: n,
            });
        }
        let mut values = vec![0.0; p * n];
        for (i, row) in rows.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                values[k * p + i] = *v;
            }
        }
        Self::from_column_major(p, n, values)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[k * self.p + i]
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.values[k * self.p..(k + 1) * self.p]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.p)
    }

    pub fn as_column_major(&self) -> &[f64] {
        &self.values
    }

    pub fn frobenius_sq(&self) -> f64 {
        crate::metrics::compensated_sum(self.values.iter().map(|v| v * v))
    }

    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Self::from_column_major(
            self.p,
            self.n,
            self.values.iter().map(|v| v * alpha).collect(),
        )
    }

    /// `Y u` for `u` of length `n`.
    pub fn mul_vec(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.n);
        let mut out = vec![0.0; self.p];
        for (col, &uk) in self.columns().zip(u) {
            for (o, y) in out.iter_mut().zip(col) {
                *o += y * uk;
            }
        }
        out
    }

    /// `Y^T v` for `v` of length `p`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.p);
        self.columns()
            .map(|col| crate::metrics::compensated_sum(col.iter().zip(v).map(|(a, b)| a * b)))
            .collect()
    }
}
