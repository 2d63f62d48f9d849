//! Scratch diagnostics for the simulation benchmarks (not part of the API).

use gmm_core::bench::{run_experiment_with_workers, ExperimentConfig, Method, ModelKind};

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "sim2".into());
    let config = if which == "sim1" {
        ExperimentConfig {
            model_kind: ModelKind::Sim1,
            n: 1200,
            replications: 20,
            methods: vec![Method::Vanilla, Method::VanillaAlg1],
            max_iters: 8,
            base_seed: 20240817,
            ridge: 1e-6,
            max_seconds: None,
        }
    } else {
        ExperimentConfig {
            model_kind: ModelKind::Sim2,
            n: 1200,
            replications: 50,
            methods: vec![Method::Vanilla, Method::VanillaAlg2],
            max_iters: 8,
            base_seed: 20240818,
            ridge: 1e-6,
            max_seconds: None,
        }
    };
    let table = run_experiment_with_workers(&config, 8).unwrap();
    for curve in &table.curves {
        println!("method {}", curve.method);
        for t in 0..curve.mean_h.len() {
            println!(
                "  t={t} mean_h={:.5} mean_ln_h={:.3} zeros={}",
                curve.mean_h[t], curve.mean_ln_h[t], curve.n_zero_reps[t]
            );
        }
    }
    let adj = table.curves[1].method.clone();
    println!("\nrep: snr  snr^2/8  ln(h_vanilla)  ln(h_adj)  dev");
    for rep in &table.replications {
        let target = rep.snr * rep.snr / 8.0;
        let hv = rep.final_h["vanilla"];
        let ha = rep.final_h[&adj];
        println!(
            "{:3}: {:.3} {:.3}  {:7.3} {:7.3}  {:6.3}",
            rep.index,
            rep.snr,
            target,
            if hv > 0.0 { hv.ln() } else { f64::NEG_INFINITY },
            if ha > 0.0 { ha.ln() } else { f64::NEG_INFINITY },
            if ha > 0.0 { (ha.ln() + target).abs() } else { f64::NAN },
        );
    }
}
