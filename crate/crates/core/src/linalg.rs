//! Minimal dense row-major matrix and the two linear solvers the regressor
//! needs.
//!
//! Feature matrices here are tall and narrow (hundreds of thousands of rows,
//! single-digit columns), so the solves happen on tiny Gram matrices and a
//! hand-rolled factorization beats pulling in a linear-algebra dependency.

use crate::error::{Error, Result};

/// Dense row-major matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Build from row slices; every row must have the same width.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::ShapeMismatch {
                    what: format!("row {i}"),
                    expected: cols,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Build element-wise from a function of (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    /// One row as a slice.
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Gram matrix `AᵀA` (cols × cols), accumulated row by row so the tall
    /// operand is swept once in storage order.
    pub fn gram(&self) -> Matrix {
        let p = self.cols;
        let mut g = vec![0.0f64; p * p];
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..p {
                let xi = row[i];
                if xi == 0.0 {
                    continue;
                }
                for j in i..p {
                    g[i * p + j] += xi * row[j];
                }
            }
        }
        // Mirror the upper triangle; bitwise symmetry by construction.
        for i in 0..p {
            for j in 0..i {
                g[i * p + j] = g[j * p + i];
            }
        }
        Matrix {
            rows: p,
            cols: p,
            data: g,
        }
    }

    /// `Aᵀv` for a vector with one entry per row.
    pub fn transpose_vec_mul(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(Error::ShapeMismatch {
                what: "vector length vs matrix rows".into(),
                expected: self.rows,
                actual: v.len(),
            });
        }
        let mut out = vec![0.0f64; self.cols];
        for (r, weight) in v.iter().enumerate() {
            if *weight == 0.0 {
                continue;
            }
            let row = self.row(r);
            for (acc, x) in out.iter_mut().zip(row) {
                *acc += weight * x;
            }
        }
        Ok(out)
    }

    /// `Av` for a vector with one entry per column.
    pub fn vec_mul(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch {
                what: "vector length vs matrix cols".into(),
                expected: self.cols,
                actual: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }
}

/// Solve `A x = b` for symmetric positive-definite `A` via Cholesky.
///
/// The regularized normal-equations matrix `X'X + αI` with `α > 0` is SPD by
/// construction; a non-positive pivot therefore signals a singular system.
pub(crate) fn solve_spd(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    debug_assert_eq!(a.cols(), n, "solve_spd needs a square matrix");
    debug_assert_eq!(b.len(), n);

    // Lower-triangular factor, built column by column.
    let mut l = vec![0.0f64; n * n];
    for j in 0..n {
        let mut diag = a.get(j, j);
        for k in 0..j {
            diag -= l[j * n + k] * l[j * n + k];
        }
        if diag <= 0.0 {
            return Err(Error::SingularSystem);
        }
        let diag = diag.sqrt();
        l[j * n + j] = diag;
        for i in (j + 1)..n {
            let mut v = a.get(i, j);
            for k in 0..j {
                v -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = v / diag;
        }
    }

    // Forward substitution: L y = b.
    let mut y = vec![0.0f64; n];
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= l[i * n + k] * y[k];
        }
        y[i] = v / l[i * n + i];
    }
    // Back substitution: L' x = y.
    let mut x = vec![0.0f64; n];
    for i in (0..n).rev() {
        let mut v = y[i];
        for k in (i + 1)..n {
            v -= l[k * n + i] * x[k];
        }
        x[i] = v / l[i * n + i];
    }
    Ok(x)
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
///
/// Used for the unregularized (`α = 0`) least-squares path. Only an *exactly*
/// zero pivot is treated as singular: a rank-deficient system built from
/// real-world floats is usually singular only up to rounding, and the honest
/// outcome of solving it is the ill-conditioned solution, not an error.
pub(crate) fn solve_partial_pivot(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    debug_assert_eq!(a.cols(), n, "solve_partial_pivot needs a square matrix");
    debug_assert_eq!(b.len(), n);

    let mut m = vec![0.0f64; n * n];
    for r in 0..n {
        m[r * n..(r + 1) * n].copy_from_slice(a.row(r));
    }
    let mut rhs = b.to_vec();

    for col in 0..n {
        // Pick the largest remaining pivot in this column.
        let mut pivot_row = col;
        let mut pivot_abs = m[col * n + col].abs();
        for r in (col + 1)..n {
            let v = m[r * n + col].abs();
            if v > pivot_abs {
                pivot_abs = v;
                pivot_row = r;
            }
        }
        if pivot_abs == 0.0 {
            return Err(Error::SingularSystem);
        }
        if pivot_row != col {
            for c in 0..n {
                m.swap(col * n + c, pivot_row * n + c);
            }
            rhs.swap(col, pivot_row);
        }
        let pivot = m[col * n + col];
        for r in (col + 1)..n {
            let factor = m[r * n + col] / pivot;
            if factor != 0.0 {
                for c in col..n {
                    m[r * n + c] -= factor * m[col * n + c];
                }
                rhs[r] -= factor * rhs[col];
            }
        }
    }

    let mut x = vec![0.0f64; n];
    for i in (0..n).rev() {
        let mut v = rhs[i];
        for k in (i + 1)..n {
            v -= m[i * n + k] * x[k];
        }
        x[i] = v / m[i * n + i];
    }
    Ok(x)
}
