//! Dense symmetric linear-algebra kernels.
//!
//! Everything here works on small row-major [`Matrix`] values (d up to a few
//! hundred). Decompositions deliberately favor robustness over speed: cyclic
//! Jacobi sweeps for eigenvalues, Cholesky for SPD solves, and SVD through the
//! Gram matrix.

mod decomp;
mod matrix;

pub use decomp::{chol_lower, log_det_spd, spd_inverse, spd_sqrt, svd_topk, sym_eig, SymEig};
pub use matrix::Matrix;

use thiserror::Error;

/// Errors from the numeric kernels.
#[derive(Debug, Error)]
pub enum NumError {
    #[error("matrix is not positive definite (pivot {pivot:.3e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("iteration did not converge after {sweeps} sweeps (off-diagonal {offdiag:.3e})")]
    NoConvergence { sweeps: usize, offdiag: f64 },

    #[error("matrix is not symmetric (max asymmetry {asym:.3e} exceeds {tol:.3e})")]
    NotSymmetric { asym: f64, tol: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry encountered in {0}")]
    NonFinite(&'static str),
}

/// Dot product of two equal-length slices.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm of a slice.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Squared Euclidean distance between two equal-length slices.
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 1);
    if count == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (count - 1) as f64;
    (0..count).map(|i| lo + step * i as f64).collect()
}
