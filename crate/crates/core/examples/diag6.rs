//! Independent validation of the sim2 pair values: ray-sampling oracle for
//! the minimum-norm point (d=5) and Monte-Carlo pair testing error.

use gmm_core::bayes::{mc_pair_error, PairHypothesis};
use gmm_core::bench::{derive_seed, STREAM_PARAMS};
use gmm_core::model::{make_sim2, standard_normal_vector};
use gmm_core::numkit::{dot, norm};
use gmm_core::snr::{boundary, min_norm_on_boundary};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let params = make_sim2(derive_seed(20240818, 0, STREAM_PARAMS));
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for (a, b) in [(0usize, 1usize), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)] {
        let qb = boundary(&params, a, b).unwrap();
        let sol = min_norm_on_boundary(&qb, 1e-10).unwrap();

        // ray oracle: smallest boundary crossing along random directions
        let mut best = f64::INFINITY;
        for _ in 0..2_000_000 {
            let u = standard_normal_vector(&mut rng, params.d);
            let len = norm(&u);
            let u: Vec<f64> = u.iter().map(|x| x / len).collect();
            let au = qb.a_mat.matvec(&u);
            let quad = 0.5 * dot(&u, &au);
            let lin = dot(&qb.b_vec, &u);
            // g(t u) = quad t^2 + lin t + c <= 0, smallest |t| over both signs
            let disc = lin * lin - 4.0 * quad * qb.c;
            if disc < 0.0 {
                if quad < 0.0 {
                    continue; // never feasible on this ray
                }
                continue;
            }
            let sq = disc.sqrt();
            for t in [(-lin - sq) / (2.0 * quad), (-lin + sq) / (2.0 * quad)] {
                if t.is_finite() {
                    best = best.min(t.abs());
                }
            }
            if quad.abs() < 1e-300 && lin != 0.0 {
                best = best.min((qb.c / lin).abs());
            }
        }
        println!(
            "pair ({a},{b}): solver 2*min = {:.4}, ray oracle 2*min = {:.4}",
            2.0 * sol.value,
            2.0 * best
        );
    }

    // Monte-Carlo optimal testing error for the binding pair (0,1)
    let hyp = PairHypothesis {
        theta0: params.centers.row(0).to_vec(),
        theta1: params.centers.row(1).to_vec(),
        sigma0: params.covariance.sigma(0).clone(),
        sigma1: params.covariance.sigma(1).clone(),
    };
    let (total, se) = mc_pair_error(&hyp, 2_000_000, 5).unwrap();
    println!("pair (0,1) optimal testing error: {total:.5} +- {se:.5}");
    println!("envelope exp(-snr'^2/8) with snr' = 4.724: {:.5}", (-4.724f64 * 4.724 / 8.0).exp());
}
