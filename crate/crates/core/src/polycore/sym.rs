use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense symmetric matrix storing only the upper triangle, row by row.
///
/// Symmetry holds by construction: `get(i, j)` and `get(j, i)` read the same slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    dim: usize,
    upper: Vec<f64>,
}

#[inline]
fn packed_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * dim - i * i.saturating_sub(1) / 2 + j - i
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix { dim, upper: vec![0.0; dim * (dim + 1) / 2] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.set(i, i, *v);
        }
        m
    }

    /// Builds a matrix from `dim * dim` row-major entries, rejecting asymmetric input.
    pub fn from_row_major(dim: usize, data: &[f64]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Validation(format!(
                "matrix of order {dim} needs {} entries, got {}",
                dim * dim,
                data.len()
            )));
        }
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let a = data[i * dim + j];
                let b = data[j * dim + i];
                if a != b {
                    return Err(Error::Validation(format!(
                        "matrix not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
                m.set(i, j, a);
            }
        }
        Ok(m)
    }

    /// Symmetrizes a dense matrix as `(M + Mᵀ) / 2`.
    pub fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "matrix must be square");
        let dim = m.nrows();
        let mut out = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                out.set(i, j, 0.5 * (m[(i, j)] + m[(j, i)]));
            }
        }
        out
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.push(self.get(i, j));
            }
        }
        out
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[packed_index(self.dim, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = packed_index(self.dim, i, j);
        self.upper[k] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        let k = packed_index(self.dim, i, j);
        self.upper[k] += v;
    }

    /// Frobenius inner product `tr(self * other)`.
    pub fn inner(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                let w = if i == j { 1.0 } else { 2.0 };
                acc += w * self.get(i, j) * other.get(i, j);
            }
        }
        acc
    }

    pub fn scale(&self, a: f64) -> SymMatrix {
        SymMatrix { dim: self.dim, upper: self.upper.iter().map(|v| a * v).collect() }
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &SymMatrix) {
        assert_eq!(self.dim, other.dim);
        for (s, o) in self.upper.iter_mut().zip(&other.upper) {
            *s += a * o;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(|v| *v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.upper.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim == 0 {
            return Vec::new();
        }
        let mut ev: Vec<f64> = self.to_dmatrix().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// True when the matrix is diagonal.
    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (i + 1..self.dim).all(|j| self.get(i, j) == 0.0))
    }

    /// Direct sum `self ⊕ other` (block diagonal).
    pub fn direct_sum(&self, other: &SymMatrix) -> SymMatrix {
        let dim = self.dim + other.dim;
        let mut out = SymMatrix::zeros(dim);
        for i in 0..self.dim {
            for j in i..self.dim {
                out.set(i, j, self.get(i, j));
            }
        }
        for i in 0..other.dim {
            for j in i..other.dim {
                out.set(self.dim + i, self.dim + j, other.get(i, j));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_layout_covers_upper_triangle() {
        let dim = 5;
        let mut seen = vec![false; dim * (dim + 1) / 2];
        for i in 0..dim {
            for j in i..dim {
                let k = packed_index(dim, i, j);
                assert!(!seen[k]);
                seen[k] = true;
                assert_eq!(k, packed_index(dim, j, i));
            }
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn rejects_asymmetric_input() {
        let err = SymMatrix::from_row_major(2, &[1.0, 2.0, 3.0, 4.0]).unwrap_err();
        assert!(err.to_string().contains("not symmetric"));
    }

    #[test]
    fn inner_matches_trace() {
        let a = SymMatrix::from_row_major(2, &[1.0, 2.0, 2.0, 3.0]).unwrap();
        let b = SymMatrix::from_row_major(2, &[4.0, -1.0, -1.0, 5.0]).unwrap();
        let trace = (a.to_dmatrix() * b.to_dmatrix()).trace();
        assert!((a.inner(&b) - trace).abs() < 1e-14);
    }
}
