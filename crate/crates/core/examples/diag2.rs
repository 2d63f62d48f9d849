//! Initialization-quality probe for the first simulation design.

use gmm_core::bench::{derive_seed, STREAM_DATA, STREAM_PARAMS};
use gmm_core::cluster::{adjusted_lloyd_homog, spectral_init, vanilla_lloyd};
use gmm_core::loss::misclustering_rate;
use gmm_core::model::{balanced_assignment, make_sim1, sample};

fn main() {
    let base = 20240817u64;
    for rep in 0..3u64 {
        let params = make_sim1(derive_seed(base, rep, STREAM_PARAMS));
        let z = balanced_assignment(1200, params.k);
        let data = sample(&params, &z, derive_seed(base, rep, STREAM_DATA)).unwrap();
        println!("rep {rep}:");
        let mut pairs: Vec<(f64, f64, f64)> = Vec::new();
        for r in 0..30u64 {
            let fit = vanilla_lloyd(&data, params.k, 1000 + r, 100).unwrap();
            let (h0, _) = misclustering_rate(&fit.labels, &z, params.k).unwrap();
            let trace = adjusted_lloyd_homog(&data, params.k, &fit.labels, 8, 1e-6).unwrap();
            let (h1, _) = misclustering_rate(trace.final_labels(), &z, params.k).unwrap();
            pairs.push((fit.sse, h0, h1));
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for (sse, h0, h1) in &pairs {
            println!("  sse {sse:11.1}  h_init {h0:.4}  h_alg1 {h1:.4}");
        }
        let spec = spectral_init(&data, params.k, 7).unwrap();
        let (hs, _) = misclustering_rate(&spec, &z, params.k).unwrap();
        let trace = adjusted_lloyd_homog(&data, params.k, &spec, 8, 1e-6).unwrap();
        let (hs1, _) = misclustering_rate(trace.final_labels(), &z, params.k).unwrap();
        println!("  spectral: h_init {hs:.4} -> h_alg1 {hs1:.4}");
    }
}
