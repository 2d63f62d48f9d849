//! Ground-truth mixture parameters and seeded synthetic data generation.
//!
//! All randomness flows through `ChaCha8` streams seeded explicitly, with
//! normal variates drawn from `rand_distr::StandardNormal`; identical seeds
//! reproduce datasets bit for bit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numkit::{chol_lower, dist_sq, linspace, norm, spd_sqrt, Matrix, NumError};

/// Cluster labels in `{0..k-1}`, one per observation.
pub type LabelVector = Vec<usize>;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error(transparent)]
    Num(#[from] NumError),
}

/// Covariance structure: one matrix shared by all clusters, or one per cluster.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CovarianceSpec {
    Homogeneous { sigma: Matrix },
    Heterogeneous { sigmas: Vec<Matrix> },
}

impl CovarianceSpec {
    pub fn is_homogeneous(&self) -> bool {
        matches!(self, CovarianceSpec::Homogeneous { .. })
    }

    /// Covariance of cluster `a`.
    pub fn sigma(&self, a: usize) -> &Matrix {
        match self {
            CovarianceSpec::Homogeneous { sigma } => sigma,
            CovarianceSpec::Heterogeneous { sigmas } => &sigmas[a],
        }
    }

    pub fn matrices(&self) -> Vec<&Matrix> {
        match self {
            CovarianceSpec::Homogeneous { sigma } => vec![sigma],
            CovarianceSpec::Heterogeneous { sigmas } => sigmas.iter().collect(),
        }
    }
}

/// Ground-truth mixture parameters: `k` centers in dimension `d` plus a
/// covariance specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GmmParams {
    pub k: usize,
    pub d: usize,
    /// Row `a` is the center of cluster `a`.
    pub centers: Matrix,
    pub covariance: CovarianceSpec,
}

/// Observations with optional ground truth.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// n x d observation matrix.
    pub y: Matrix,
    pub truth: Option<LabelVector>,
    pub params: Option<GmmParams>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.y.rows()
    }

    pub fn d(&self) -> usize {
        self.y.cols()
    }
}

/// Check every structural invariant of `params`.
pub fn validate(params: &GmmParams) -> Result<(), ModelError> {
    let GmmParams { k, d, centers, covariance } = params;
    if *k < 2 {
        return Err(ModelError::InvalidParams(format!("k must be >= 2, got {k}")));
    }
    if centers.rows() != *k || centers.cols() != *d {
        return Err(ModelError::InvalidParams(format!(
            "centers must be {k}x{d}, got {}x{}",
            centers.rows(),
            centers.cols()
        )));
    }
    if !centers.all_finite() {
        return Err(ModelError::InvalidParams("centers contain non-finite entries".into()));
    }
    for a in 0..*k {
        for b in (a + 1)..*k {
            if dist_sq(centers.row(a), centers.row(b)) <= 0.0 {
                return Err(ModelError::InvalidParams(format!(
                    "centers {a} and {b} coincide"
                )));
            }
        }
    }
    let mats = covariance.matrices();
    if let CovarianceSpec::Heterogeneous { sigmas } = covariance {
        if sigmas.len() != *k {
            return Err(ModelError::InvalidParams(format!(
                "heterogeneous covariance needs {k} matrices, got {}",
                sigmas.len()
            )));
        }
    }
    for (idx, sigma) in mats.iter().enumerate() {
        if sigma.rows() != *d || sigma.cols() != *d {
            return Err(ModelError::InvalidParams(format!(
                "covariance {idx} must be {d}x{d}, got {}x{}",
                sigma.rows(),
                sigma.cols()
            )));
        }
        if sigma.max_asymmetry() > 1e-12 * sigma.max_abs().max(1.0) {
            return Err(ModelError::InvalidParams(format!(
                "covariance {idx} is not symmetric"
            )));
        }
        chol_lower(sigma).map_err(|e| {
            ModelError::InvalidParams(format!("covariance {idx} is not positive definite: {e}"))
        })?;
    }
    Ok(())
}

/// Check that every label is a valid cluster index.
pub fn validate_labels(labels: &[usize], k: usize) -> Result<(), ModelError> {
    match labels.iter().position(|&z| z >= k) {
        Some(j) => Err(ModelError::InvalidParams(format!(
            "label {} at position {j} is out of range for k={k}",
            labels[j]
        ))),
        None => Ok(()),
    }
}

/// One standard-normal vector of length `d`.
pub fn standard_normal_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

/// Draw `Y_j = theta_{z_j} + Sigma_{z_j}^{1/2} w_j` with `w_j` standard normal,
/// in observation order. The returned dataset keeps `assignment` as truth.
pub fn sample(params: &GmmParams, assignment: &[usize], seed: u64) -> Result<Dataset, ModelError> {
    validate(params)?;
    validate_labels(assignment, params.k)?;
    let d = params.d;
    let roots: Vec<Matrix> = params
        .covariance
        .matrices()
        .iter()
        .map(|s| spd_sqrt(s))
        .collect::<Result<_, _>>()?;
    let root_for = |a: usize| -> &Matrix {
        if params.covariance.is_homogeneous() {
            &roots[0]
        } else {
            &roots[a]
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = assignment.len();
    let mut y = Matrix::zeros(n, d);
    for (j, &a) in assignment.iter().enumerate() {
        let w = standard_normal_vector(&mut rng, d);
        let noise = root_for(a).matvec(&w);
        let row = y.row_mut(j);
        for (i, r) in row.iter_mut().enumerate() {
            *r = params.centers.get(a, i) + noise[i];
        }
    }
    Ok(Dataset { y, truth: Some(assignment.to_vec()), params: Some(params.clone()) })
}

/// Block labeling `0..k-1` with sizes as equal as possible; the first `n % k`
/// clusters take the extra point.
pub fn balanced_assignment(n: usize, k: usize) -> LabelVector {
    assert!(k >= 1 && n >= k, "need n >= k >= 1");
    let base = n / k;
    let extra = n % k;
    let mut labels = Vec::with_capacity(n);
    for a in 0..k {
        let size = base + usize::from(a < extra);
        labels.extend(std::iter::repeat(a).take(size));
    }
    labels
}

/// Haar-distributed orthogonal matrix: QR of a standard Gaussian matrix with
/// the R diagonal signs fixed positive (two rounds of modified Gram-Schmidt).
pub fn random_orthogonal(d: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_orthonormal_columns(d, d, &mut rng)
}

/// First `r` columns of a Haar orthogonal d x d matrix, returned as d x r.
///
/// Gram-Schmidt on Gaussian columns normalizes with a positive pivot, which is
/// exactly the sign-fixed QR that makes the distribution Haar. The second pass
/// repairs the orthogonality loss of classical MGS.
fn random_orthonormal_columns(d: usize, r: usize, rng: &mut ChaCha8Rng) -> Matrix {
    assert!(r <= d);
    let mut cols: Vec<Vec<f64>> = (0..r).map(|_| standard_normal_vector(rng, d)).collect();
    for _ in 0..2 {
        for j in 0..r {
            for i in 0..j {
                let proj = crate::numkit::dot(&cols[j], &cols[i]);
                let prev = cols[i].clone();
                for (x, p) in cols[j].iter_mut().zip(&prev) {
                    *x -= proj * p;
                }
            }
            let len = norm(&cols[j]);
            assert!(len > 0.0, "degenerate Gaussian draw");
            for x in cols[j].iter_mut() {
                *x /= len;
            }
        }
    }
    let mut q = Matrix::zeros(d, r);
    for (j, col) in cols.iter().enumerate() {
        for i in 0..d {
            q.set(i, j, col[i]);
        }
    }
    q
}

/// First simulation design: d=50, k=30, shared covariance `U^T diag(0.5..8) U`
/// with Haar `U`, centers mutually orthogonal with norm 9.
pub fn make_sim1(seed: u64) -> GmmParams {
    let (d, k) = (50, 30);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_orthonormal_columns(d, d, &mut rng);
    let lambda = Matrix::diag(&linspace(0.5, 8.0, d));
    let sigma = u.transpose().matmul(&lambda).matmul(&u);
    let sigma = sigma.symmetrized(1e-9).expect("construction is symmetric");

    let frame = random_orthonormal_columns(d, k, &mut rng);
    let mut centers = Matrix::zeros(k, d);
    for a in 0..k {
        for i in 0..d {
            centers.set(a, i, 9.0 * frame.get(i, a));
        }
    }
    GmmParams { k, d, centers, covariance: CovarianceSpec::Homogeneous { sigma } }
}

/// Second simulation design: d=5, k=3 with heterogeneous covariances
/// (identity; diag(0.5..8); rotated diagonal uniform in [0.5,2]) and centers
/// at a random unit vector, +5 e_1, then +10 in a random direction.
pub fn make_sim2(seed: u64) -> GmmParams {
    let (d, k) = (5, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let sigma1 = Matrix::identity(d);
    let sigma2 = Matrix::diag(&linspace(0.5, 8.0, d));
    let u = random_orthonormal_columns(d, d, &mut rng);
    let lambda3: Vec<f64> = (0..d).map(|_| rng.gen_range(0.5..2.0)).collect();
    let sigma3 = u
        .transpose()
        .matmul(&Matrix::diag(&lambda3))
        .matmul(&u)
        .symmetrized(1e-9)
        .expect("construction is symmetric");

    let mut theta1 = standard_normal_vector(&mut rng, d);
    let len = norm(&theta1);
    theta1.iter_mut().for_each(|x| *x /= len);

    let mut theta2 = theta1.clone();
    theta2[0] += 5.0;

    let mut dir = standard_normal_vector(&mut rng, d);
    let len = norm(&dir);
    dir.iter_mut().for_each(|x| *x /= len);
    let theta3: Vec<f64> = theta2.iter().zip(&dir).map(|(t, v)| t + 10.0 * v).collect();

    GmmParams {
        k,
        d,
        centers: Matrix::from_rows(&[theta1, theta2, theta3]),
        covariance: CovarianceSpec::Heterogeneous { sigmas: vec![sigma1, sigma2, sigma3] },
    }
}
