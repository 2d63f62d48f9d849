//! Compare plain and greedy k-means++ seeding as pipeline starters.

use gmm_core::bench::{derive_seed, STREAM_DATA, STREAM_PARAMS};
use gmm_core::cluster::{adjusted_lloyd_homog, classification_objective, nearest_center_labels};
use gmm_core::loss::misclustering_rate;
use gmm_core::model::{balanced_assignment, make_sim1, sample, Dataset};
use gmm_core::numkit::{dist_sq, Matrix};
use gmm_core::snr::snr_homogeneous;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn greedy_seed(data: &Dataset, k: usize, seed: u64, candidates: usize) -> Matrix {
    let n = data.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut dists: Vec<f64> = (0..n)
        .map(|j| dist_sq(data.y.row(j), data.y.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = dists.iter().sum();
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for _ in 0..candidates {
            let mut target = rng.gen_range(0.0..total.max(1e-300));
            let mut pick = n - 1;
            for j in 0..n {
                if dists[j] >= target {
                    pick = j;
                    break;
                }
                target -= dists[j];
            }
            let nd: Vec<f64> = (0..n)
                .map(|j| dists[j].min(dist_sq(data.y.row(j), data.y.row(pick))))
                .collect();
            let pot: f64 = nd.iter().sum();
            if best.as_ref().map_or(true, |(b, _, _)| pot < *b) {
                best = Some((pot, pick, nd));
            }
        }
        let (_, pick, nd) = best.unwrap();
        chosen.push(pick);
        dists = nd;
    }
    let mut centers = Matrix::zeros(k, data.d());
    for (a, &j) in chosen.iter().enumerate() {
        centers.row_mut(a).copy_from_slice(data.y.row(j));
    }
    centers
}

fn lloyd_from(data: &Dataset, centers: Matrix, iters: usize) -> Vec<usize> {
    let k = centers.rows();
    let mut centers = centers;
    let mut labels = nearest_center_labels(&data.y, &centers);
    for _ in 0..iters {
        let mut counts = vec![0usize; k];
        let mut sums = Matrix::zeros(k, data.d());
        for (j, &a) in labels.iter().enumerate() {
            counts[a] += 1;
            for i in 0..data.d() {
                sums.set(a, i, sums.get(a, i) + data.y.get(j, i));
            }
        }
        for a in 0..k {
            if counts[a] > 0 {
                for i in 0..data.d() {
                    centers.set(a, i, sums.get(a, i) / counts[a] as f64);
                }
            }
        }
        let next = nearest_center_labels(&data.y, &centers);
        if next == labels {
            break;
        }
        labels = next;
    }
    labels
}

fn main() {
    let base = 20240817u64;
    let restarts = 40u64;
    for rep in 0..6u64 {
        let params = make_sim1(derive_seed(base, rep, STREAM_PARAMS));
        let z = balanced_assignment(1200, params.k);
        let data = sample(&params, &z, derive_seed(base, rep, STREAM_DATA)).unwrap();
        let snr = snr_homogeneous(&params).unwrap();
        let target = snr * snr / 8.0;
        let in_band = |h: f64| h == 0.0 || (h.ln() + target).abs() <= 0.35 * target;

        let mut basin = 0;
        let mut best: Option<(f64, f64)> = None;
        for r in 0..restarts {
            let centers = greedy_seed(&data, params.k, 70_000 + 1000 * rep + r, 5);
            let labels = lloyd_from(&data, centers, 100);
            let trace = adjusted_lloyd_homog(&data, params.k, &labels, 8, 1e-6).unwrap();
            let obj = classification_objective(&data, trace.states.last().unwrap()).unwrap();
            let (hf, _) = misclustering_rate(trace.final_labels(), &z, params.k).unwrap();
            if in_band(hf) {
                basin += 1;
            }
            if best.as_ref().map_or(true, |(b, _)| obj < *b) {
                best = Some((obj, hf));
            }
        }
        let (obj, hf) = best.unwrap();
        println!(
            "rep {rep}: greedy basin {basin}/{restarts}, best-objective h {hf:.5} (obj {obj:.0}) in_band {}",
            in_band(hf)
        );
    }
}
