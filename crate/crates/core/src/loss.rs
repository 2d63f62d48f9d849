//! Misclustering losses with optimal label alignment.
//!
//! The misclustering rate minimizes disagreements over all bijections of the
//! label set, computed exactly with a Hungarian assignment on the confusion
//! matrix. The center loss is evaluated verbatim on the given labels; callers
//! that need aligned labels apply the bijection first.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::GmmParams;
use crate::numkit::dist_sq;

#[derive(Debug, Error)]
pub enum LossError {
    #[error("label vectors have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("label {label} out of range for k={k}")]
    LabelOutOfRange { label: usize, k: usize },
}

/// A bijection on `{0..k-1}`; `mapping[i]` is the relabeled value of `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationMap {
    pub mapping: Vec<usize>,
}

impl PermutationMap {
    pub fn apply(&self, labels: &[usize]) -> Vec<usize> {
        labels.iter().map(|&z| self.mapping[z]).collect()
    }
}

fn check_inputs(z: &[usize], zstar: &[usize], k: usize) -> Result<(), LossError> {
    if z.len() != zstar.len() {
        return Err(LossError::LengthMismatch { left: z.len(), right: zstar.len() });
    }
    for &label in z.iter().chain(zstar) {
        if label >= k {
            return Err(LossError::LabelOutOfRange { label, k });
        }
    }
    Ok(())
}

/// `confusion[i][t]` counts points with estimated label `i` and true label `t`.
fn confusion_matrix(z: &[usize], zstar: &[usize], k: usize) -> Vec<Vec<i64>> {
    let mut c = vec![vec![0i64; k]; k];
    for (&zi, &ti) in z.iter().zip(zstar) {
        c[zi][ti] += 1;
    }
    c
}

/// Optimal agreement (max total confusion weight over bijections) plus one
/// witnessing assignment, via the O(k^3) Hungarian algorithm with potentials
/// on the negated weights.
fn assignment_max(weights: &[Vec<i64>]) -> (i64, Vec<usize>) {
    let k = weights.len();
    const INF: i64 = i64::MAX / 4;
    let cost = |i: usize, j: usize| -weights[i][j];

    // e-maxx Hungarian with potentials; rows and columns are 1-based.
    let mut u = vec![0i64; k + 1];
    let mut v = vec![0i64; k + 1];
    let mut p = vec![0usize; k + 1]; // p[j] = row matched to column j
    let mut way = vec![0usize; k + 1];

    for i in 1..=k {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=k {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        while j0 != 0 {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        }
    }

    let mut row_to_col = vec![0usize; k];
    for j in 1..=k {
        row_to_col[p[j] - 1] = j - 1;
    }
    let total: i64 = (0..k).map(|i| weights[i][row_to_col[i]]).sum();
    (total, row_to_col)
}

/// Best agreement achievable when rows `0..fixed.len()` are already mapped to
/// `fixed[i]`; remaining rows are matched optimally among unused columns.
fn agreement_with_prefix(confusion: &[Vec<i64>], fixed: &[usize]) -> i64 {
    let k = confusion.len();
    let fixed_total: i64 = fixed.iter().enumerate().map(|(i, &j)| confusion[i][j]).sum();
    let rest = k - fixed.len();
    if rest == 0 {
        return fixed_total;
    }
    let mut used = vec![false; k];
    for &j in fixed {
        used[j] = true;
    }
    let free_cols: Vec<usize> = (0..k).filter(|&j| !used[j]).collect();
    let sub: Vec<Vec<i64>> = (fixed.len()..k)
        .map(|i| free_cols.iter().map(|&j| confusion[i][j]).collect())
        .collect();
    let (sub_total, _) = assignment_max(&sub);
    fixed_total + sub_total
}

/// Agreement-maximizing bijection from estimated labels to true labels.
///
/// Among all bijections with optimal agreement, returns the lexicographically
/// smallest mapping so reports are deterministic.
pub fn best_bijection(z: &[usize], zstar: &[usize], k: usize) -> Result<PermutationMap, LossError> {
    check_inputs(z, zstar, k)?;
    let confusion = confusion_matrix(z, zstar, k);
    let (best_total, _) = assignment_max(&confusion);

    let mut fixed: Vec<usize> = Vec::with_capacity(k);
    for _row in 0..k {
        let mut used = vec![false; k];
        for &j in &fixed {
            used[j] = true;
        }
        let mut chosen = None;
        for j in 0..k {
            if used[j] {
                continue;
            }
            fixed.push(j);
            let reachable = agreement_with_prefix(&confusion, &fixed);
            fixed.pop();
            if reachable == best_total {
                chosen = Some(j);
                break;
            }
        }
        fixed.push(chosen.expect("some column always completes an optimal assignment"));
    }
    Ok(PermutationMap { mapping: fixed })
}

/// Misclustering error rate: minimum fraction of disagreements over all label
/// bijections, together with the minimizing bijection.
pub fn misclustering_rate(
    z: &[usize],
    zstar: &[usize],
    k: usize,
) -> Result<(f64, PermutationMap), LossError> {
    check_inputs(z, zstar, k)?;
    if z.is_empty() {
        return Ok((0.0, PermutationMap { mapping: (0..k).collect() }));
    }
    let map = best_bijection(z, zstar, k)?;
    let agree = z
        .iter()
        .zip(zstar)
        .filter(|&(&zi, &ti)| map.mapping[zi] == ti)
        .count();
    Ok(((z.len() - agree) as f64 / z.len() as f64, map))
}

/// Sum of squared true-center gaps between assigned and true clusters, on the
/// labels exactly as given (no bijection minimization).
pub fn center_loss(z: &[usize], zstar: &[usize], params: &GmmParams) -> Result<f64, LossError> {
    check_inputs(z, zstar, params.k)?;
    Ok(z.iter()
        .zip(zstar)
        .map(|(&zi, &ti)| dist_sq(params.centers.row(zi), params.centers.row(ti)))
        .sum())
}
