//! Small dense linear-algebra helpers built around a Cholesky factorization
//! with an explicit minimum-pivot threshold.
//!
//! The threshold is load-bearing: a covariance matrix whose factorization
//! pivot drops below it is treated as not positive definite, which is how the
//! collinear-data failure mode of the EM imputer is detected and reported.

use nalgebra::{DMatrix, DVector};

/// Raised when a pivot `m[j][j] - sum_k L[j][k]^2` falls below the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotFailure {
    pub index: usize,
    pub pivot: f64,
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
pub struct CholeskyFactor {
    lower: DMatrix<f64>,
}

/// Factor `m = L L^T`, requiring every pivot (the diagonal value before the
/// square root) to be at least `min_pivot`.
pub fn cholesky(m: &DMatrix<f64>, min_pivot: f64) -> Result<CholeskyFactor, PivotFailure> {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    let mut lower = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut pivot = m[(j, j)];
        for k in 0..j {
            pivot -= lower[(j, k)] * lower[(j, k)];
        }
        if !(pivot >= min_pivot) {
            return Err(PivotFailure { index: j, pivot });
        }
        let diag = pivot.sqrt();
        lower[(j, j)] = diag;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= lower[(i, k)] * lower[(j, k)];
            }
            lower[(i, j)] = s / diag;
        }
    }
    Ok(CholeskyFactor { lower })
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    /// Solve `A x = b` where `A = L L^T`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        debug_assert_eq!(b.len(), n);
        // forward: L y = b
        let mut y = DVector::<f64>::zeros(n);
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.lower[(i, k)] * y[k];
            }
            y[i] = s / self.lower[(i, i)];
        }
        // backward: L^T x = y
        let mut x = DVector::<f64>::zeros(n);
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.lower[(k, i)] * x[k];
            }
            x[i] = s / self.lower[(i, i)];
        }
        x
    }

    /// Forward substitution only: solve `L y = b`.
    /// `|y|^2` is then the Mahalanobis quadratic form of `b`.
    pub fn solve_lower(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let mut y = DVector::<f64>::zeros(n);
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.lower[(i, k)] * y[k];
            }
            y[i] = s / self.lower[(i, i)];
        }
        y
    }

    /// `ln det A = 2 sum ln L[i][i]`.
    pub fn log_det(&self) -> f64 {
        (0..self.dim()).map(|i| self.lower[(i, i)].ln()).sum::<f64>() * 2.0
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }
}

/// Max absolute asymmetry `|m - m^T|`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}
