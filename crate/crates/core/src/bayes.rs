//! Optimal two-class discriminant rules and their testing error.
//!
//! For two Gaussians with a shared covariance the likelihood-ratio test is
//! linear; with distinct covariances it is quadratic in the observation.
//! Both deciders resolve ties toward hypothesis 1. Testing error is the sum
//! of both misclassification probabilities, estimated by Monte Carlo, and is
//! compared against the exponent envelope `exp(-snr^2 / 8)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::standard_normal_vector;
use crate::numkit::{dot, log_det_spd, spd_inverse, spd_sqrt, Matrix, NumError};

#[derive(Debug, Error)]
pub enum BayesError {
    #[error(transparent)]
    Num(#[from] NumError),

    #[error("linear rule requires a shared covariance (max difference {0:.3e})")]
    CovariancesDiffer(f64),
}

/// A pair of Gaussian hypotheses; hypothesis 0 is `N(theta0, sigma0)`.
#[derive(Debug, Clone)]
pub struct PairHypothesis {
    pub theta0: Vec<f64>,
    pub theta1: Vec<f64>,
    pub sigma0: Matrix,
    pub sigma1: Matrix,
}

impl PairHypothesis {
    pub fn dim(&self) -> usize {
        self.theta0.len()
    }

    fn shared_covariance(&self) -> Result<&Matrix, BayesError> {
        let diff = self.sigma0.sub(&self.sigma1).max_abs();
        if diff > 1e-10 * self.sigma0.max_abs().max(1.0) {
            return Err(BayesError::CovariancesDiffer(diff));
        }
        Ok(&self.sigma0)
    }
}

/// Which likelihood-ratio rule to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionRule {
    Linear,
    Quadratic,
}

/// Linear rule for a shared covariance: decide 1 iff
/// `2 (theta1 - theta0)' Sigma^{-1} x >= theta1' Sigma^{-1} theta1 - theta0' Sigma^{-1} theta0`.
pub fn lda_decide(x: &[f64], hyp: &PairHypothesis) -> Result<usize, BayesError> {
    let sigma = hyp.shared_covariance()?;
    let inv = spd_inverse(sigma)?;
    let diff: Vec<f64> = hyp.theta1.iter().zip(&hyp.theta0).map(|(a, b)| a - b).collect();
    let lhs = 2.0 * dot(&diff, &inv.matvec(x));
    let rhs = dot(&hyp.theta1, &inv.matvec(&hyp.theta1))
        - dot(&hyp.theta0, &inv.matvec(&hyp.theta0));
    Ok(usize::from(lhs >= rhs))
}

/// Quadratic rule: decide 1 iff
/// `log|Sigma0| + (x-theta0)' Sigma0^{-1} (x-theta0) >= log|Sigma1| + (x-theta1)' Sigma1^{-1} (x-theta1)`.
pub fn qda_decide(x: &[f64], hyp: &PairHypothesis) -> Result<usize, BayesError> {
    let inv0 = spd_inverse(&hyp.sigma0)?;
    let inv1 = spd_inverse(&hyp.sigma1)?;
    let ld0 = log_det_spd(&hyp.sigma0)?;
    let ld1 = log_det_spd(&hyp.sigma1)?;
    let r0: Vec<f64> = x.iter().zip(&hyp.theta0).map(|(a, b)| a - b).collect();
    let r1: Vec<f64> = x.iter().zip(&hyp.theta1).map(|(a, b)| a - b).collect();
    let s0 = ld0 + dot(&r0, &inv0.matvec(&r0));
    let s1 = ld1 + dot(&r1, &inv1.matvec(&r1));
    Ok(usize::from(s0 >= s1))
}

/// Monte-Carlo estimate of `P_H0(decide = 1) + P_H1(decide = 0)` with
/// `trials` draws per hypothesis, plus the binomial standard error of the sum.
pub fn mc_pair_error(
    hyp: &PairHypothesis,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64), BayesError> {
    let rule = if hyp.sigma0.sub(&hyp.sigma1).max_abs()
        <= 1e-10 * hyp.sigma0.max_abs().max(1.0)
    {
        DecisionRule::Linear
    } else {
        DecisionRule::Quadratic
    };
    mc_pair_error_with(hyp, trials, seed, rule)
}

/// Monte-Carlo testing error with an explicit rule choice.
pub fn mc_pair_error_with(
    hyp: &PairHypothesis,
    trials: usize,
    seed: u64,
    rule: DecisionRule,
) -> Result<(f64, f64), BayesError> {
    assert!(trials >= 1_000, "Monte-Carlo estimate needs at least 1000 trials");
    let d = hyp.dim();
    let root0 = spd_sqrt(&hyp.sigma0)?;
    let root1 = spd_sqrt(&hyp.sigma1)?;

    // Precompute the decision statistic pieces once; the per-draw closures
    // keep the inner loop at two matvecs.
    let inv0 = spd_inverse(&hyp.sigma0)?;
    let inv1 = spd_inverse(&hyp.sigma1)?;
    let ld0 = log_det_spd(&hyp.sigma0)?;
    let ld1 = log_det_spd(&hyp.sigma1)?;
    let decide = |x: &[f64]| -> usize {
        match rule {
            DecisionRule::Linear => {
                let diff: Vec<f64> =
                    hyp.theta1.iter().zip(&hyp.theta0).map(|(a, b)| a - b).collect();
                let lhs = 2.0 * dot(&diff, &inv0.matvec(x));
                let rhs = dot(&hyp.theta1, &inv0.matvec(&hyp.theta1))
                    - dot(&hyp.theta0, &inv0.matvec(&hyp.theta0));
                usize::from(lhs >= rhs)
            }
            DecisionRule::Quadratic => {
                let r0: Vec<f64> = x.iter().zip(&hyp.theta0).map(|(a, b)| a - b).collect();
                let r1: Vec<f64> = x.iter().zip(&hyp.theta1).map(|(a, b)| a - b).collect();
                let s0 = ld0 + dot(&r0, &inv0.matvec(&r0));
                let s1 = ld1 + dot(&r1, &inv1.matvec(&r1));
                usize::from(s0 >= s1)
            }
        }
    };
    if rule == DecisionRule::Linear {
        hyp.shared_covariance()?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wrong0 = 0usize;
    for _ in 0..trials {
        let w = standard_normal_vector(&mut rng, d);
        let noise = root0.matvec(&w);
        let x: Vec<f64> = hyp.theta0.iter().zip(&noise).map(|(t, e)| t + e).collect();
        wrong0 += decide(&x);
    }
    let mut wrong1 = 0usize;
    for _ in 0..trials {
        let w = standard_normal_vector(&mut rng, d);
        let noise = root1.matvec(&w);
        let x: Vec<f64> = hyp.theta1.iter().zip(&noise).map(|(t, e)| t + e).collect();
        wrong1 += usize::from(decide(&x) == 0);
    }

    let t = trials as f64;
    let p0 = wrong0 as f64 / t;
    let p1 = wrong1 as f64 / t;
    let se = (p0 * (1.0 - p0) / t + p1 * (1.0 - p1) / t).sqrt();
    Ok((p0 + p1, se))
}

/// Exponent envelope of the minimax misclustering rate: `exp(-snr^2 / 8)`.
pub fn minimax_exponent_bound(snr_value: f64) -> f64 {
    assert!(snr_value >= 0.0, "snr must be nonnegative");
    (-snr_value * snr_value / 8.0).exp()
}
