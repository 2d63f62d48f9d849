//! Initializers: k-means++ seeding, vanilla Lloyd, and spectral projection.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{nearest_center_labels, ClusterError};
use crate::model::Dataset;
use crate::numkit::{dist_sq, svd_topk, Matrix};

/// Restart count used by the spectral initializer and the benchmark baselines.
pub const DEFAULT_RESTARTS: usize = 10;
/// Iteration cap for initializer Lloyd runs.
pub const DEFAULT_INIT_ITERS: usize = 100;

/// Squared-distance-proportional seeding. Returns `k` distinct data rows.
///
/// Uses the greedy variant: each step samples `2 + floor(ln k)` candidates by
/// the D^2 distribution and keeps the one that lowers the total potential the
/// most. Plain D^2 seeding degrades badly when the noise norm dominates the
/// center separation; the greedy pick recovers much of the loss.
pub fn kmeanspp_seed(data: &Dataset, k: usize, seed: u64) -> Result<Matrix, ClusterError> {
    let n = data.n();
    if n < k || k == 0 {
        return Err(ClusterError::TooFewPoints { n, k });
    }
    let candidates = 2 + (k as f64).ln().floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut taken = vec![false; n];
    let first = rng.gen_range(0..n);
    chosen.push(first);
    taken[first] = true;

    // dists[j] = squared distance to the nearest chosen seed; taken entries
    // are pinned to zero so they carry no sampling mass
    let mut dists: Vec<f64> = (0..n)
        .map(|j| dist_sq(data.y.row(j), data.y.row(first)))
        .collect();
    dists[first] = 0.0;

    while chosen.len() < k {
        let total: f64 = dists.iter().sum();
        let next = if total > 0.0 {
            let sample_one = |rng: &mut ChaCha8Rng| -> usize {
                let mut target = rng.gen_range(0.0..total);
                for j in 0..n {
                    if dists[j] <= 0.0 {
                        continue;
                    }
                    if dists[j] >= target {
                        return j;
                    }
                    target -= dists[j];
                }
                // floating-point underflow at the tail
                (0..n).rev().find(|&j| dists[j] > 0.0).unwrap()
            };
            let mut best: Option<(f64, usize)> = None;
            for _ in 0..candidates {
                let cand = sample_one(&mut rng);
                let potential: f64 = (0..n)
                    .map(|j| dists[j].min(dist_sq(data.y.row(j), data.y.row(cand))))
                    .sum();
                if best.as_ref().map_or(true, |(p, _)| potential < *p) {
                    best = Some((potential, cand));
                }
            }
            best.unwrap().1
        } else {
            // all remaining points coincide with a chosen seed
            (0..n).find(|&j| !taken[j]).unwrap()
        };
        taken[next] = true;
        chosen.push(next);
        dists[next] = 0.0;
        for j in 0..n {
            if !taken[j] {
                dists[j] = dists[j].min(dist_sq(data.y.row(j), data.y.row(next)));
            }
        }
    }

    let mut centers = Matrix::zeros(k, data.d());
    for (a, &j) in chosen.iter().enumerate() {
        centers.row_mut(a).copy_from_slice(data.y.row(j));
    }
    Ok(centers)
}

/// Result of a vanilla Lloyd run.
#[derive(Debug, Clone)]
pub struct VanillaFit {
    pub labels: Vec<usize>,
    pub centers: Matrix,
    pub iterations_used: usize,
    /// Within-cluster sum of squared Euclidean distances at the fixed point.
    pub sse: f64,
}

/// Classical k-means: nearest-center assignment and mean updates from
/// k-means++ seeds, stopping when labels repeat or after `max_iters`.
pub fn vanilla_lloyd(
    data: &Dataset,
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<VanillaFit, ClusterError> {
    assert!(max_iters >= 1);
    let mut centers = kmeanspp_seed(data, k, seed)?;
    let mut labels = nearest_center_labels(&data.y, &centers);
    let mut iterations_used = 1;
    for t in 1..=max_iters {
        iterations_used = t;
        super::means_with_empty_fix(&data.y, k, &mut labels, &mut centers)?;
        let next = nearest_center_labels(&data.y, &centers);
        if next == labels {
            break;
        }
        labels = next;
    }
    let sse: f64 = labels
        .iter()
        .enumerate()
        .map(|(j, &a)| dist_sq(data.y.row(j), centers.row(a)))
        .sum();
    Ok(VanillaFit { labels, centers, iterations_used, sse })
}

/// Best of `restarts` vanilla Lloyd runs by final SSE, with restart seeds
/// derived from `seed` by golden-ratio increments.
pub fn vanilla_lloyd_restarts(
    data: &Dataset,
    k: usize,
    seed: u64,
    max_iters: usize,
    restarts: usize,
) -> Result<VanillaFit, ClusterError> {
    assert!(restarts >= 1);
    let mut best: Option<VanillaFit> = None;
    for r in 0..restarts {
        let s = seed.wrapping_add((r as u64).wrapping_mul(0x9E3779B97F4A7C15));
        let fit = vanilla_lloyd(data, k, s, max_iters)?;
        if best.as_ref().map_or(true, |b| fit.sse < b.sse) {
            best = Some(fit);
        }
    }
    Ok(best.unwrap())
}

/// Spectral initialization: project the rows onto the span of the top
/// `min(k, d)` right singular vectors, then cluster the projection with
/// restarted vanilla Lloyd.
pub fn spectral_init(data: &Dataset, k: usize, seed: u64) -> Result<Vec<usize>, ClusterError> {
    let n = data.n();
    if n < k || k == 0 {
        return Err(ClusterError::TooFewPoints { n, k });
    }
    let r = k.min(data.d());
    let (_values, vectors) = svd_topk(&data.y, r)?;
    let proj = data.y.matmul(&vectors);
    let proj_data = Dataset { y: proj, truth: None, params: None };
    let fit = vanilla_lloyd_restarts(&proj_data, k, seed, DEFAULT_INIT_ITERS, DEFAULT_RESTARTS)?;
    Ok(fit.labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::misclustering_rate;
    use crate::model::{balanced_assignment, sample, CovarianceSpec, GmmParams};

    fn blob_params(gap: f64) -> GmmParams {
        GmmParams {
            k: 2,
            d: 2,
            centers: Matrix::from_rows(&[vec![0.0, 0.0], vec![gap, 0.0]]),
            covariance: CovarianceSpec::Homogeneous { sigma: Matrix::identity(2) },
        }
    }

    #[test]
    fn seeds_are_all_points_when_n_equals_k() {
        let y = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 0.5]]);
        let data = Dataset { y, truth: None, params: None };
        let centers = kmeanspp_seed(&data, 3, 5).unwrap();
        let mut rows: Vec<Vec<f64>> = (0..3).map(|a| centers.row(a).to_vec()).collect();
        rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(rows, vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 0.5]]);
    }

    #[test]
    fn seeds_cover_both_duplicated_values() {
        // many copies of two distinct points: D^2 weighting forces one of each
        let mut rows = vec![vec![0.0, 0.0]; 8];
        rows.extend(vec![vec![5.0, 5.0]; 8]);
        let data = Dataset { y: Matrix::from_rows(&rows), truth: None, params: None };
        for seed in 0..20 {
            let centers = kmeanspp_seed(&data, 2, seed).unwrap();
            let a = centers.row(0);
            let b = centers.row(1);
            assert!(dist_sq(a, b) > 1.0, "seed {seed} picked duplicates");
        }
    }

    #[test]
    fn seeding_is_deterministic() {
        let params = blob_params(10.0);
        let data = sample(&params, &balanced_assignment(40, 2), 3).unwrap();
        let a = kmeanspp_seed(&data, 2, 9).unwrap();
        let b = kmeanspp_seed(&data, 2, 9).unwrap();
        assert_eq!(a.data(), b.data());
    }

    #[test]
    fn too_few_points() {
        let data = Dataset { y: Matrix::zeros(2, 2), truth: None, params: None };
        assert!(matches!(
            kmeanspp_seed(&data, 3, 0),
            Err(ClusterError::TooFewPoints { .. })
        ));
    }

    #[test]
    fn lloyd_recovers_separated_blobs() {
        let params = blob_params(20.0);
        let z = balanced_assignment(100, 2);
        let data = sample(&params, &z, 11).unwrap();
        let fit = vanilla_lloyd(&data, 2, 1, 100).unwrap();
        let (h, _) = misclustering_rate(&fit.labels, &z, 2).unwrap();
        assert_eq!(h, 0.0);
    }

    #[test]
    fn lloyd_exact_on_repeated_points() {
        let mut rows = Vec::new();
        for _ in 0..5 {
            rows.push(vec![0.0, 0.0]);
            rows.push(vec![4.0, 0.0]);
            rows.push(vec![0.0, 4.0]);
        }
        let data = Dataset { y: Matrix::from_rows(&rows), truth: None, params: None };
        let fit = vanilla_lloyd(&data, 3, 2, 100).unwrap();
        assert_eq!(fit.iterations_used, 1);
        assert_eq!(fit.sse, 0.0);
        let truth: Vec<usize> = (0..15).map(|j| j % 3).collect();
        let (h, _) = misclustering_rate(&fit.labels, &truth, 3).unwrap();
        assert_eq!(h, 0.0);
    }

    #[test]
    fn lloyd_sse_non_increasing() {
        let params = blob_params(3.0);
        let z = balanced_assignment(60, 2);
        let data = sample(&params, &z, 13).unwrap();
        // recompute the SSE independently after each iteration cap
        let mut prev = f64::INFINITY;
        for iters in 1..=6 {
            let fit = vanilla_lloyd(&data, 2, 4, iters).unwrap();
            let sse: f64 = fit
                .labels
                .iter()
                .enumerate()
                .map(|(j, &a)| dist_sq(data.y.row(j), fit.centers.row(a)))
                .sum();
            assert!(sse <= prev + 1e-9, "iters {iters}: {sse} > {prev}");
            prev = sse;
        }
    }

    #[test]
    fn spectral_recovers_noiseless_mixture() {
        let params = GmmParams {
            k: 3,
            d: 6,
            centers: Matrix::from_rows(&[
                vec![5.0, 0.0, 0.0, 1.0, 0.0, 0.0],
                vec![0.0, 5.0, 0.0, 0.0, 1.0, 0.0],
                vec![0.0, 0.0, 5.0, 0.0, 0.0, 1.0],
            ]),
            covariance: CovarianceSpec::Homogeneous {
                sigma: Matrix::identity(6).scale(1e-18),
            },
        };
        let z = balanced_assignment(30, 3);
        let data = sample(&params, &z, 17).unwrap();
        let labels = spectral_init(&data, 3, 23).unwrap();
        let (h, _) = misclustering_rate(&labels, &z, 3).unwrap();
        assert_eq!(h, 0.0);
    }

    #[test]
    fn spectral_ignores_zero_variance_coordinates() {
        let params = blob_params(8.0);
        let z = balanced_assignment(50, 2);
        let data = sample(&params, &z, 19).unwrap();
        let labels_base = spectral_init(&data, 2, 29).unwrap();

        // append three all-zero coordinates
        let mut wide = Matrix::zeros(50, 5);
        for j in 0..50 {
            for i in 0..2 {
                wide.set(j, i, data.y.get(j, i));
            }
        }
        let padded = Dataset { y: wide, truth: None, params: None };
        let labels_padded = spectral_init(&padded, 2, 29).unwrap();
        let (h, _) = misclustering_rate(&labels_padded, &labels_base, 2).unwrap();
        assert_eq!(h, 0.0);
    }

    #[test]
    fn spectral_is_deterministic() {
        let params = blob_params(4.0);
        let data = sample(&params, &balanced_assignment(40, 2), 31).unwrap();
        assert_eq!(
            spectral_init(&data, 2, 37).unwrap(),
            spectral_init(&data, 2, 37).unwrap()
        );
    }
}
