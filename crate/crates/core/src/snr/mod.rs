//! Separation functionals between mixture components.
//!
//! For a shared covariance the signal-to-noise ratio is the minimum whitened
//! center gap. With heterogeneous covariances the analogue is defined through
//! the region of whitened observations that the optimal quadratic rule
//! misassigns: twice the norm of the closest point of that region to the
//! origin, minimized over ordered cluster pairs.

mod grid;
mod minnorm;

pub use grid::grid_oracle;
pub use minnorm::{min_norm_on_boundary, MinNormSolution};

use thiserror::Error;

use crate::model::{CovarianceSpec, GmmParams};
use crate::numkit::{dist_sq, dot, log_det_spd, spd_inverse, spd_sqrt, Matrix, NumError};

#[derive(Debug, Error)]
pub enum SnrError {
    #[error(transparent)]
    Num(#[from] NumError),

    #[error("covariance is not homogeneous")]
    NotHomogeneous,

    #[error("cluster pair ({a},{b}) is invalid for k={k}")]
    BadPair { a: usize, b: usize, k: usize },

    #[error("minimum-norm solver failed: {0}")]
    NumericalFailure(String),
}

/// Quadric region `g(x) = b.x + x'Ax/2 + c <= 0` describing, in coordinates
/// whitened by cluster `a`, the observations that the optimal quadratic rule
/// assigns to cluster `b`.
#[derive(Debug, Clone)]
pub struct QuadraticBoundary {
    pub a_mat: Matrix,
    pub b_vec: Vec<f64>,
    pub c: f64,
}

impl QuadraticBoundary {
    pub fn dim(&self) -> usize {
        self.b_vec.len()
    }

    /// Membership functional; the region is `g <= 0`.
    pub fn g(&self, x: &[f64]) -> f64 {
        let ax = self.a_mat.matvec(x);
        dot(&self.b_vec, x) + 0.5 * dot(x, &ax) + self.c
    }
}

/// Separation summary for a parameter set.
#[derive(Debug, Clone)]
pub struct SnrReport {
    /// Minimum Euclidean center gap.
    pub delta: f64,
    /// Whitened minimum gap; present only for a shared covariance.
    pub snr: Option<f64>,
    /// `snr_pairs[a][b]` for ordered pairs; diagonal is NaN, empty regions
    /// (pairs that cannot be confused) are +infinity.
    pub snr_pairs: Vec<Vec<f64>>,
    /// Minimum of the finite pair entries.
    pub snr_prime: f64,
    /// Minimizing whitened point per ordered pair, when one exists.
    pub witnesses: Vec<Vec<Option<Vec<f64>>>>,
}

/// Minimum distance among the centers.
pub fn min_center_gap(params: &GmmParams) -> f64 {
    let mut best = f64::INFINITY;
    for a in 0..params.k {
        for b in (a + 1)..params.k {
            best = best.min(dist_sq(params.centers.row(a), params.centers.row(b)).sqrt());
        }
    }
    best
}

/// Whitened minimum center gap `min_{a != b} ||Sigma^{-1/2}(theta_a - theta_b)||`
/// for a shared covariance.
pub fn snr_homogeneous(params: &GmmParams) -> Result<f64, SnrError> {
    let sigma = match &params.covariance {
        CovarianceSpec::Homogeneous { sigma } => sigma,
        CovarianceSpec::Heterogeneous { .. } => return Err(SnrError::NotHomogeneous),
    };
    let inv = spd_inverse(sigma)?;
    let mut best = f64::INFINITY;
    for a in 0..params.k {
        for b in (a + 1)..params.k {
            let xi: Vec<f64> = params
                .centers
                .row(a)
                .iter()
                .zip(params.centers.row(b))
                .map(|(x, y)| x - y)
                .collect();
            let q = dot(&xi, &inv.matvec(&xi));
            best = best.min(q.max(0.0).sqrt());
        }
    }
    Ok(best)
}

/// Build the quadric region for the ordered pair `(a, b)`:
/// `A = Sigma_a^{1/2} Sigma_b^{-1} Sigma_a^{1/2} - I`,
/// `b = Sigma_a^{1/2} Sigma_b^{-1} (theta_a - theta_b)`,
/// `c = (theta_a - theta_b)' Sigma_b^{-1} (theta_a - theta_b)/2
///      - log|Sigma_a|/2 + log|Sigma_b|/2`.
pub fn boundary(params: &GmmParams, a: usize, b: usize) -> Result<QuadraticBoundary, SnrError> {
    if a == b || a >= params.k || b >= params.k {
        return Err(SnrError::BadPair { a, b, k: params.k });
    }
    let sigma_a = params.covariance.sigma(a);
    let sigma_b = params.covariance.sigma(b);
    let sqrt_a = spd_sqrt(sigma_a)?;
    let inv_b = spd_inverse(sigma_b)?;
    let xi: Vec<f64> = params
        .centers
        .row(a)
        .iter()
        .zip(params.centers.row(b))
        .map(|(x, y)| x - y)
        .collect();

    let mut a_mat = sqrt_a.matmul(&inv_b).matmul(&sqrt_a);
    for i in 0..params.d {
        a_mat.set(i, i, a_mat.get(i, i) - 1.0);
    }
    let a_mat = a_mat.symmetrized(1e-10 * a_mat.max_abs().max(1.0))?;
    let b_vec = sqrt_a.matmul(&inv_b).matvec(&xi);
    let c = 0.5 * dot(&xi, &inv_b.matvec(&xi)) - 0.5 * log_det_spd(sigma_a)?
        + 0.5 * log_det_spd(sigma_b)?;
    Ok(QuadraticBoundary { a_mat, b_vec, c })
}

/// Default boundary residual tolerance for the minimum-norm solver.
pub const DEFAULT_MIN_NORM_TOL: f64 = 1e-10;

/// Full separation report: all ordered pair values, their minimum, and the
/// homogeneous shortcut when the covariance is shared.
pub fn snr_hetero(params: &GmmParams) -> Result<SnrReport, SnrError> {
    let k = params.k;
    let mut snr_pairs = vec![vec![f64::NAN; k]; k];
    let mut witnesses: Vec<Vec<Option<Vec<f64>>>> = vec![vec![None; k]; k];
    let mut snr_prime = f64::INFINITY;
    for a in 0..k {
        for b in 0..k {
            if a == b {
                continue;
            }
            let qb = boundary(params, a, b)?;
            let sol = min_norm_on_boundary(&qb, DEFAULT_MIN_NORM_TOL)?;
            let pair = 2.0 * sol.value;
            snr_pairs[a][b] = pair;
            witnesses[a][b] = sol.witness;
            if pair.is_finite() {
                snr_prime = snr_prime.min(pair);
            }
        }
    }
    let snr = match &params.covariance {
        CovarianceSpec::Homogeneous { .. } => Some(snr_homogeneous(params)?),
        CovarianceSpec::Heterogeneous { .. } => None,
    };
    Ok(SnrReport { delta: min_center_gap(params), snr, snr_pairs, snr_prime, witnesses })
}

#[cfg(test)]
mod tests;
