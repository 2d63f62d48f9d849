//! Per-restart basin-entry statistics for the vanilla -> adjusted pipeline.

use gmm_core::bench::{derive_seed, STREAM_DATA, STREAM_PARAMS};
use gmm_core::cluster::{adjusted_lloyd_homog, classification_objective, vanilla_lloyd};
use gmm_core::loss::misclustering_rate;
use gmm_core::model::{balanced_assignment, make_sim1, sample};
use gmm_core::snr::snr_homogeneous;

fn main() {
    let base = 20240817u64;
    let restarts = 40u64;
    for rep in 0..6u64 {
        let params = make_sim1(derive_seed(base, rep, STREAM_PARAMS));
        let z = balanced_assignment(1200, params.k);
        let data = sample(&params, &z, derive_seed(base, rep, STREAM_DATA)).unwrap();
        let snr = snr_homogeneous(&params).unwrap();
        let target = snr * snr / 8.0;

        let mut rows: Vec<(f64, f64, f64)> = Vec::new(); // (objective, h_init, h_final)
        for r in 0..restarts {
            let fit = vanilla_lloyd(&data, params.k, 90_000 + 1000 * rep + r, 100).unwrap();
            let trace = adjusted_lloyd_homog(&data, params.k, &fit.labels, 8, 1e-6).unwrap();
            let obj = classification_objective(&data, trace.states.last().unwrap()).unwrap();
            let (hi, _) = misclustering_rate(&fit.labels, &z, params.k).unwrap();
            let (hf, _) = misclustering_rate(trace.final_labels(), &z, params.k).unwrap();
            rows.push((obj, hi, hf));
        }
        rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let in_band = |h: f64| h > 0.0 && (h.ln() + target).abs() <= 0.35 * target;
        let basin = rows.iter().filter(|(_, _, hf)| in_band(*hf) || *hf == 0.0).count();
        let (obj, hi, hf) = rows[0];
        println!(
            "rep {rep}: target {target:.2}, basin {basin}/{restarts}, best-objective pick: obj {obj:.0} h_init {hi:.4} h_final {hf:.5} in_band {}",
            in_band(hf) || hf == 0.0
        );
    }
}
