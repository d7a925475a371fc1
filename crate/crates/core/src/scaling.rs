//! Column standardization for feature matrices.
//!
//! Regularization penalizes all coefficients with one knob, which only makes
//! sense when features share a scale — port currents run to hundreds of amps
//! while status flags are 0/1. The [`Standardizer`] is always fit on training
//! data only and then applied unchanged to anything it transforms, so no
//! statistics leak out of the training window.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A column is treated as constant when its spread is this small relative to
/// its magnitude; dividing by a rounding-noise scale would blow the column up.
const CONSTANT_COLUMN_REL_TOL: f64 = 1e-12;

/// Per-column shift/scale fitted on a training matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    means: Vec<f64>,
    scales: Vec<f64>,
}

impl Standardizer {
    /// Fit means and population standard deviations on `train`.
    ///
    /// Zero-variance columns record a scale of 1 so their transformed values
    /// are exactly zero rather than a division by zero.
    ///
    /// # Errors
    /// An empty training matrix has no statistics to fit.
    pub fn fit(train: &Matrix) -> Result<Self> {
        let (n, p) = (train.rows(), train.cols());
        if n == 0 || p == 0 {
            return Err(Error::EmptyInput(format!(
                "cannot fit standardizer on a {n}x{p} matrix"
            )));
        }
        let mut means = vec![0.0f64; p];
        for r in 0..n {
            let row = train.row(r);
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n as f64;
        }

        let mut scales = vec![0.0f64; p];
        for r in 0..n {
            let row = train.row(r);
            for ((s, v), m) in scales.iter_mut().zip(row).zip(&means) {
                let d = v - m;
                *s += d * d;
            }
        }
        for (s, m) in scales.iter_mut().zip(&means) {
            // Population standard deviation: divide by N, not N − 1.
            let sigma = (*s / n as f64).sqrt();
            *s = if sigma <= CONSTANT_COLUMN_REL_TOL * (1.0 + m.abs()) {
                1.0
            } else {
                sigma
            };
        }
        Ok(Standardizer { means, scales })
    }

    /// Apply the fitted shift/scale to `m`.
    ///
    /// # Errors
    /// Column count must match the training matrix.
    pub fn transform(&self, m: &Matrix) -> Result<Matrix> {
        if m.cols() != self.means.len() {
            return Err(Error::ShapeMismatch {
                what: "standardizer input columns".into(),
                expected: self.means.len(),
                actual: m.cols(),
            });
        }
        Ok(Matrix::from_fn(m.rows(), m.cols(), |r, c| {
            (m.get(r, c) - self.means[c]) / self.scales[c]
        }))
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Rebuild from persisted statistics (model files store these).
    pub fn from_parts(means: Vec<f64>, scales: Vec<f64>) -> Result<Self> {
        if means.len() != scales.len() {
            return Err(Error::ShapeMismatch {
                what: "standardizer means vs scales".into(),
                expected: means.len(),
                actual: scales.len(),
            });
        }
        if let Some(s) = scales.iter().find(|s| **s <= 0.0 || !s.is_finite()) {
            return Err(Error::Domain(format!("non-positive standardizer scale {s}")));
        }
        Ok(Standardizer { means, scales })
    }
}

/// Fit on `train`, transform `apply_to` with the training statistics.
pub fn standardize(train: &Matrix, apply_to: &Matrix) -> Result<(Standardizer, Matrix)> {
    let standardizer = Standardizer::fit(train)?;
    let transformed = standardizer.transform(apply_to)?;
    Ok((standardizer, transformed))
}
