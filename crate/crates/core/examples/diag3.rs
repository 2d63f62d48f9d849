//! Basin analysis: can the adjusted fit reach the optimal rate from truth,
//! and do restarts ever find the basin on a hard replication?

use gmm_core::bench::{derive_seed, STREAM_DATA, STREAM_PARAMS};
use gmm_core::cluster::{adjusted_lloyd_homog, classification_objective, vanilla_lloyd, FitState};
use gmm_core::loss::misclustering_rate;
use gmm_core::model::{balanced_assignment, make_sim1, sample};
use gmm_core::snr::snr_homogeneous;

fn main() {
    let base = 20240817u64;
    for rep in [2u64, 0] {
        let params = make_sim1(derive_seed(base, rep, STREAM_PARAMS));
        let z = balanced_assignment(1200, params.k);
        let data = sample(&params, &z, derive_seed(base, rep, STREAM_DATA)).unwrap();
        let snr = snr_homogeneous(&params).unwrap();
        println!("rep {rep}: snr^2/8 = {:.3}, optimal h = {:.5}", snr * snr / 8.0, (-snr * snr / 8.0).exp());

        // ceiling: start from the generating labels
        let trace = adjusted_lloyd_homog(&data, params.k, &z, 8, 1e-6).unwrap();
        let (h_truth, _) = misclustering_rate(trace.final_labels(), &z, params.k).unwrap();
        let obj_truth = *trace.objective.last().unwrap();
        println!("  from truth: h = {h_truth:.5}, objective = {obj_truth:.1}");

        // diffuse 10% corruption of the truth
        let mut z0 = z.clone();
        let mut st = 12345u64;
        for zj in z0.iter_mut() {
            st = st.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            if st >> 60 == 0 {
                *zj = (st >> 33) as usize % params.k;
            }
        }
        let (h0, _) = misclustering_rate(&z0, &z, params.k).unwrap();
        let trace = adjusted_lloyd_homog(&data, params.k, &z0, 8, 1e-6).unwrap();
        let (h1, _) = misclustering_rate(trace.final_labels(), &z, params.k).unwrap();
        println!("  from {h0:.4}-corrupted truth: h = {h1:.5}");

        // 100 restarts: best objective after the adjusted fit
        let mut best: Option<(f64, f64, f64)> = None;
        for r in 0..100u64 {
            let fit = vanilla_lloyd(&data, params.k, 40_000 + r, 100).unwrap();
            let trace = adjusted_lloyd_homog(&data, params.k, &fit.labels, 8, 1e-6).unwrap();
            let state: &FitState = trace.states.last().unwrap();
            let obj = classification_objective(&data, state).unwrap();
            let (h, _) = misclustering_rate(&state.labels, &z, params.k).unwrap();
            let (hi, _) = misclustering_rate(&fit.labels, &z, params.k).unwrap();
            if best.as_ref().map_or(true, |(b, _, _)| obj < *b) {
                best = Some((obj, h, hi));
            }
        }
        let (obj, h, hi) = best.unwrap();
        println!("  best-objective of 100 restarts: obj = {obj:.1}, h_init = {hi:.4}, h = {h:.5}");
    }
}
