//! Covariance-adjusted Lloyd iterations with full traces.
//!
//! Both fitters are hard-EM loops: estimate centers from the current labels,
//! estimate the covariance structure, then reassign every point by the
//! covariance-aware metric. The homogeneous variant pools one covariance over
//! all clusters and reassigns by Mahalanobis distance; the heterogeneous
//! variant keeps one covariance per cluster and adds its log-determinant to
//! the assignment score.

mod init;

pub use init::{
    kmeanspp_seed, spectral_init, vanilla_lloyd, vanilla_lloyd_restarts, VanillaFit,
    DEFAULT_INIT_ITERS, DEFAULT_RESTARTS,
};

use thiserror::Error;

use crate::loss::{misclustering_rate, LossError};
use crate::model::{CovarianceSpec, Dataset, LabelVector};
use crate::numkit::{
    chol_lower, dist_sq, dot, log_det_spd, spd_inverse, spd_sqrt, Matrix, NumError,
};

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("need at least k points (n = {n}, k = {k})")]
    TooFewPoints { n: usize, k: usize },

    #[error("initial labels invalid: {0}")]
    BadInit(String),

    #[error("covariance stayed degenerate after ridge regularization{}", cluster.map(|a| format!(" (cluster {a})")).unwrap_or_default())]
    DegenerateCovariance { cluster: Option<usize> },

    #[error(transparent)]
    Num(#[from] NumError),

    #[error(transparent)]
    Loss(#[from] LossError),
}

/// Snapshot of one iteration of an adjusted fit.
#[derive(Debug, Clone)]
pub struct FitState {
    pub centers: Matrix,
    pub covariance: CovarianceSpec,
    pub labels: LabelVector,
    pub iteration: usize,
}

/// Full trace of an adjusted Lloyd run.
#[derive(Debug, Clone, Default)]
pub struct FitTrace {
    pub initial_labels: LabelVector,
    pub states: Vec<FitState>,
    /// Classification objective per recorded state.
    pub objective: Vec<f64>,
    /// Misclustering rate against the dataset truth, for iteration 0
    /// (initializer) through the last recorded state.
    pub h_curve: Option<Vec<f64>>,
    /// First iteration whose labels matched the previous ones.
    pub converged_at: Option<usize>,
    pub regularization_events: usize,
    pub empty_cluster_events: usize,
}

impl FitTrace {
    pub fn final_labels(&self) -> &[usize] {
        self.states.last().map_or(&self.initial_labels, |s| &s.labels)
    }
}

/// Nearest-center assignment by squared Euclidean distance with
/// smallest-index tie-breaking.
pub fn nearest_center_labels(points: &Matrix, centers: &Matrix) -> Vec<usize> {
    let k = centers.rows();
    (0..points.rows())
        .map(|j| {
            let row = points.row(j);
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for a in 0..k {
                let d = dist_sq(row, centers.row(a));
                if d < best_d {
                    best_d = d;
                    best = a;
                }
            }
            best
        })
        .collect()
}

/// Pooled covariance of `points` around per-label `centers`, denominator n.
fn pooled_scatter(points: &Matrix, centers: &Matrix, labels: &[usize]) -> Matrix {
    let d = points.cols();
    let mut s = Matrix::zeros(d, d);
    let mut resid = vec![0.0; d];
    for (j, &a) in labels.iter().enumerate() {
        let row = points.row(j);
        let center = centers.row(a);
        for i in 0..d {
            resid[i] = row[i] - center[i];
        }
        for i in 0..d {
            let ri = resid[i];
            if ri == 0.0 {
                continue;
            }
            let dst = s.row_mut(i);
            for (l, rl) in resid.iter().enumerate() {
                dst[l] += ri * rl;
            }
        }
    }
    s.scale(1.0 / points.rows() as f64)
}

/// Cluster means with empty-cluster repair: while any cluster has no member,
/// the point farthest from its own center donates itself to the empty
/// cluster. Distance is measured in the pooled Mahalanobis metric of the
/// current labeling (Euclidean if that scatter is singular), which keeps the
/// repair affine-equivariant. Returns the number of donor moves.
pub(crate) fn means_with_empty_fix(
    points: &Matrix,
    k: usize,
    labels: &mut Vec<usize>,
    centers: &mut Matrix,
) -> Result<usize, ClusterError> {
    let (n, d) = (points.rows(), points.cols());
    if n < k {
        return Err(ClusterError::TooFewPoints { n, k });
    }
    let mut events = 0usize;
    loop {
        let mut counts = vec![0usize; k];
        *centers = Matrix::zeros(k, d);
        for (j, &a) in labels.iter().enumerate() {
            counts[a] += 1;
            let row = points.row(j);
            let dst = centers.row_mut(a);
            for i in 0..d {
                dst[i] += row[i];
            }
        }
        for a in 0..k {
            if counts[a] > 0 {
                let inv = 1.0 / counts[a] as f64;
                centers.row_mut(a).iter_mut().for_each(|x| *x *= inv);
            }
        }
        let Some(empty) = (0..k).find(|&a| counts[a] == 0) else {
            return Ok(events);
        };

        // pooled metric over the occupied clusters
        let scatter = pooled_scatter(points, centers, labels);
        let inv = chol_lower(&scatter).ok().and_then(|_| spd_inverse(&scatter).ok());
        let mut donor = None;
        let mut worst = -1.0;
        let mut resid = vec![0.0; d];
        for (j, &a) in labels.iter().enumerate() {
            if counts[a] < 2 {
                continue; // do not empty another cluster
            }
            let row = points.row(j);
            let center = centers.row(a);
            for i in 0..d {
                resid[i] = row[i] - center[i];
            }
            let dist = match &inv {
                Some(m) => dot(&resid, &m.matvec(&resid)),
                None => dot(&resid, &resid),
            };
            if dist > worst {
                worst = dist;
                donor = Some(j);
            }
        }
        let donor = donor.ok_or(ClusterError::TooFewPoints { n, k })?;
        labels[donor] = empty;
        events += 1;
    }
}

/// Add `ridge * trace(S)/d` to the diagonal when `S` fails Cholesky; one retry.
fn regularize(
    s: Matrix,
    ridge: f64,
    cluster: Option<usize>,
    events: &mut usize,
) -> Result<Matrix, ClusterError> {
    if chol_lower(&s).is_ok() {
        return Ok(s);
    }
    let d = s.rows();
    let trace: f64 = (0..d).map(|i| s.get(i, i)).sum();
    let mut fixed = s;
    let bump = ridge * trace / d as f64;
    for i in 0..d {
        fixed.set(i, i, fixed.get(i, i) + bump);
    }
    *events += 1;
    if chol_lower(&fixed).is_ok() {
        Ok(fixed)
    } else {
        Err(ClusterError::DegenerateCovariance { cluster })
    }
}

fn check_init(data: &Dataset, k: usize, z0: &[usize], max_iters: usize) -> Result<(), ClusterError> {
    if z0.len() != data.n() {
        return Err(ClusterError::BadInit(format!(
            "initial labels have length {}, want {}",
            z0.len(),
            data.n()
        )));
    }
    if let Some(&bad) = z0.iter().find(|&&a| a >= k) {
        return Err(ClusterError::BadInit(format!("label {bad} out of range for k={k}")));
    }
    if max_iters == 0 {
        return Err(ClusterError::BadInit("max_iters must be at least 1".into()));
    }
    if data.n() < k {
        return Err(ClusterError::TooFewPoints { n: data.n(), k });
    }
    Ok(())
}

fn push_h(h_curve: &mut Option<Vec<f64>>, data: &Dataset, k: usize, z: &[usize]) -> Result<(), ClusterError> {
    if let (Some(curve), Some(truth)) = (h_curve.as_mut(), data.truth.as_ref()) {
        let (h, _) = misclustering_rate(z, truth, k)?;
        curve.push(h);
    }
    Ok(())
}

/// Adjusted Lloyd iteration for a shared covariance: means, pooled covariance
/// with denominator n, Mahalanobis reassignment. Stops early when the labels
/// reach a fixed point.
pub fn adjusted_lloyd_homog(
    data: &Dataset,
    k: usize,
    z0: &[usize],
    max_iters: usize,
    ridge: f64,
) -> Result<FitTrace, ClusterError> {
    check_init(data, k, z0, max_iters)?;
    let mut trace = FitTrace {
        initial_labels: z0.to_vec(),
        h_curve: data.truth.is_some().then(Vec::new),
        ..FitTrace::default()
    };
    push_h(&mut trace.h_curve, data, k, z0)?;

    let mut labels = z0.to_vec();
    let mut centers = Matrix::zeros(k, data.d());
    for t in 1..=max_iters {
        trace.empty_cluster_events +=
            means_with_empty_fix(&data.y, k, &mut labels, &mut centers)?;
        let sigma = regularize(
            pooled_scatter(&data.y, &centers, &labels),
            ridge,
            None,
            &mut trace.regularization_events,
        )?;

        // whiten once: Mahalanobis argmin equals Euclidean argmin in the
        // whitened coordinates
        let inv_root = spd_inverse(&spd_sqrt(&sigma)?)?;
        let white_points = data.y.matmul(&inv_root);
        let white_centers = centers.matmul(&inv_root);
        let next = nearest_center_labels(&white_points, &white_centers);

        let state = FitState {
            centers: centers.clone(),
            covariance: CovarianceSpec::Homogeneous { sigma },
            labels: next.clone(),
            iteration: t,
        };
        trace.objective.push(classification_objective(data, &state)?);
        push_h(&mut trace.h_curve, data, k, &next)?;
        let done = next == labels;
        labels = next;
        trace.states.push(state);
        if done {
            trace.converged_at = Some(t);
            break;
        }
    }
    Ok(trace)
}

/// Adjusted Lloyd iteration for per-cluster covariances: means, per-cluster
/// covariance with the cluster count as denominator, reassignment by
/// Mahalanobis distance plus log-determinant.
pub fn adjusted_lloyd_hetero(
    data: &Dataset,
    k: usize,
    z0: &[usize],
    max_iters: usize,
    ridge: f64,
) -> Result<FitTrace, ClusterError> {
    check_init(data, k, z0, max_iters)?;
    let (n, d) = (data.n(), data.d());
    let mut trace = FitTrace {
        initial_labels: z0.to_vec(),
        h_curve: data.truth.is_some().then(Vec::new),
        ..FitTrace::default()
    };
    push_h(&mut trace.h_curve, data, k, z0)?;

    let mut labels = z0.to_vec();
    let mut centers = Matrix::zeros(k, d);
    for t in 1..=max_iters {
        trace.empty_cluster_events +=
            means_with_empty_fix(&data.y, k, &mut labels, &mut centers)?;

        let mut counts = vec![0usize; k];
        for &a in &labels {
            counts[a] += 1;
        }
        let mut sigmas = Vec::with_capacity(k);
        for a in 0..k {
            let mut s = Matrix::zeros(d, d);
            let mut resid = vec![0.0; d];
            for (j, &zj) in labels.iter().enumerate() {
                if zj != a {
                    continue;
                }
                let row = data.y.row(j);
                let center = centers.row(a);
                for i in 0..d {
                    resid[i] = row[i] - center[i];
                }
                for i in 0..d {
                    let ri = resid[i];
                    let dst = s.row_mut(i);
                    for (l, rl) in resid.iter().enumerate() {
                        dst[l] += ri * rl;
                    }
                }
            }
            let s = s.scale(1.0 / counts[a] as f64);
            sigmas.push(regularize(s, ridge, Some(a), &mut trace.regularization_events)?);
        }

        let invs: Vec<Matrix> = sigmas.iter().map(spd_inverse).collect::<Result<_, _>>()?;
        let log_dets: Vec<f64> = sigmas.iter().map(log_det_spd).collect::<Result<_, _>>()?;
        let mut next = vec![0usize; n];
        let mut resid = vec![0.0; d];
        for j in 0..n {
            let row = data.y.row(j);
            let mut best = 0usize;
            let mut best_score = f64::INFINITY;
            for a in 0..k {
                let center = centers.row(a);
                for i in 0..d {
                    resid[i] = row[i] - center[i];
                }
                let score = dot(&resid, &invs[a].matvec(&resid)) + log_dets[a];
                if score < best_score {
                    best_score = score;
                    best = a;
                }
            }
            next[j] = best;
        }

        let state = FitState {
            centers: centers.clone(),
            covariance: CovarianceSpec::Heterogeneous { sigmas },
            labels: next.clone(),
            iteration: t,
        };
        trace.objective.push(classification_objective(data, &state)?);
        push_h(&mut trace.h_curve, data, k, &next)?;
        let done = next == labels;
        labels = next;
        trace.states.push(state);
        if done {
            trace.converged_at = Some(t);
            break;
        }
    }
    Ok(trace)
}

/// Twice the negative complete-data log-likelihood up to the `n d ln(2 pi)`
/// constant: `sum_j (y_j - theta_{z_j})' Sigma_{z_j}^{-1} (y_j - theta_{z_j})
/// + log|Sigma_{z_j}|`.
pub fn classification_objective(data: &Dataset, state: &FitState) -> Result<f64, ClusterError> {
    let d = data.d();
    let (invs, log_dets): (Vec<Matrix>, Vec<f64>) = match &state.covariance {
        CovarianceSpec::Homogeneous { sigma } => {
            (vec![spd_inverse(sigma)?], vec![log_det_spd(sigma)?])
        }
        CovarianceSpec::Heterogeneous { sigmas } => (
            sigmas.iter().map(spd_inverse).collect::<Result<_, _>>()?,
            sigmas.iter().map(log_det_spd).collect::<Result<_, _>>()?,
        ),
    };
    let shared = matches!(state.covariance, CovarianceSpec::Homogeneous { .. });
    let mut total = 0.0;
    let mut resid = vec![0.0; d];
    for (j, &a) in state.labels.iter().enumerate() {
        let row = data.y.row(j);
        let center = state.centers.row(a);
        for i in 0..d {
            resid[i] = row[i] - center[i];
        }
        let idx = if shared { 0 } else { a };
        total += dot(&resid, &invs[idx].matvec(&resid)) + log_dets[idx];
    }
    Ok(total)
}
