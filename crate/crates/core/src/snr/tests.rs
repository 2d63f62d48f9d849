use super::*;
use crate::model::{make_sim1, make_sim2, random_orthogonal, CovarianceSpec, GmmParams};
use crate::numkit::{norm, sym_eig, Matrix};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_spd(d: usize, seed: u64, lo: f64, hi: f64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(2654435761).wrapping_add(17));
    let q = random_orthogonal(d, seed);
    let w: Vec<f64> = (0..d).map(|_| rng.gen_range(lo..hi)).collect();
    q.transpose()
        .matmul(&Matrix::diag(&w))
        .matmul(&q)
        .symmetrized(1e-9)
        .unwrap()
}

fn random_unit(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v = crate::model::standard_normal_vector(rng, d);
    let len = norm(&v);
    v.iter_mut().for_each(|x| *x /= len);
    v
}

/// Two-cluster heterogeneous instance with a prescribed center gap.
fn pair_params(d: usize, seed: u64, gap: f64, lo: f64, hi: f64) -> GmmParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dir = random_unit(d, &mut rng);
    let theta1: Vec<f64> = dir.iter().map(|x| x * gap).collect();
    GmmParams {
        k: 2,
        d,
        centers: Matrix::from_rows(&[vec![0.0; d], theta1]),
        covariance: CovarianceSpec::Heterogeneous {
            sigmas: vec![random_spd(d, seed ^ 0xa5a5, lo, hi), random_spd(d, seed ^ 0x5a5a, lo, hi)],
        },
    }
}

#[test]
fn min_center_gap_examples() {
    let p = make_sim1(1);
    assert!((min_center_gap(&p) - 9.0 * 2f64.sqrt()).abs() < 1e-8);

    let two = GmmParams {
        k: 2,
        d: 2,
        centers: Matrix::from_rows(&[vec![0.0, 0.0], vec![3.0, 4.0]]),
        covariance: CovarianceSpec::Homogeneous { sigma: Matrix::identity(2) },
    };
    assert!((min_center_gap(&two) - 5.0).abs() < 1e-12);

    let three = GmmParams {
        k: 3,
        d: 2,
        centers: Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![10.0, 0.0]]),
        covariance: CovarianceSpec::Homogeneous { sigma: Matrix::identity(2) },
    };
    assert!((min_center_gap(&three) - 1.0).abs() < 1e-12);
}

#[test]
fn snr_homogeneous_examples() {
    let mut p = GmmParams {
        k: 2,
        d: 2,
        centers: Matrix::from_rows(&[vec![0.0, 0.0], vec![3.0, 4.0]]),
        covariance: CovarianceSpec::Homogeneous { sigma: Matrix::identity(2) },
    };
    // identity covariance: snr equals the center gap
    assert!((snr_homogeneous(&p).unwrap() - 5.0).abs() < 1e-12);

    p.centers = Matrix::from_rows(&[vec![0.0, 0.0], vec![4.0, 0.0]]);
    p.covariance = CovarianceSpec::Homogeneous { sigma: Matrix::diag(&[4.0, 1.0]) };
    assert!((snr_homogeneous(&p).unwrap() - 2.0).abs() < 1e-12);

    // scaling theta -> theta/s, sigma -> sigma/s^2 leaves snr unchanged
    let s = 7.0;
    let scaled = GmmParams {
        k: 2,
        d: 2,
        centers: p.centers.scale(1.0 / s),
        covariance: CovarianceSpec::Homogeneous {
            sigma: Matrix::diag(&[4.0 / (s * s), 1.0 / (s * s)]),
        },
    };
    assert!((snr_homogeneous(&scaled).unwrap() - 2.0).abs() < 1e-10);
}

#[test]
fn boundary_equal_covariance_is_halfspace() {
    let sigma = random_spd(3, 5, 0.5, 8.0);
    let p = GmmParams {
        k: 2,
        d: 3,
        centers: Matrix::from_rows(&[vec![1.0, 0.0, 2.0], vec![-1.0, 3.0, 0.0]]),
        covariance: CovarianceSpec::Heterogeneous { sigmas: vec![sigma.clone(), sigma] },
    };
    let qb = boundary(&p, 0, 1).unwrap();
    assert!(qb.a_mat.max_abs() < 1e-10);
    assert!(qb.c > 0.0);
}

#[test]
fn boundary_identity_covariances() {
    // Sigma_a = Sigma_b = I with gap Xi: halfspace x.Xi <= -||Xi||^2/2
    let p = GmmParams {
        k: 2,
        d: 2,
        centers: Matrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 0.0]]),
        covariance: CovarianceSpec::Homogeneous { sigma: Matrix::identity(2) },
    };
    let qb = boundary(&p, 0, 1).unwrap();
    assert!(qb.a_mat.max_abs() < 1e-12);
    assert!((qb.b_vec[0] - 2.0).abs() < 1e-12 && (qb.b_vec[1] - 1.0).abs() < 1e-12);
    assert!((qb.c - 2.5).abs() < 1e-12);
}

#[test]
fn boundary_scalar_example() {
    // Sigma_a = 4, Sigma_b = 1, d=1, equal centers
    let p = GmmParams {
        k: 2,
        d: 1,
        centers: Matrix::from_rows(&[vec![0.0], vec![1e-9]]),
        covariance: CovarianceSpec::Heterogeneous {
            sigmas: vec![Matrix::diag(&[4.0]), Matrix::diag(&[1.0])],
        },
    };
    let qb = boundary(&p, 0, 1).unwrap();
    assert!((qb.a_mat.get(0, 0) - 3.0).abs() < 1e-9);
    assert!(qb.b_vec[0].abs() < 1e-8);
    assert!((qb.c - (-0.5 * 4f64.ln())).abs() < 1e-8);
}

#[test]
fn min_norm_halfspace_analytic() {
    let qb = QuadraticBoundary {
        a_mat: Matrix::zeros(3, 3),
        b_vec: vec![2.0, -1.0, 2.0],
        c: 6.0,
    };
    let sol = min_norm_on_boundary(&qb, 1e-10).unwrap();
    let bn = 3.0; // ||b||
    assert!((sol.value - qb.c / bn).abs() < 1e-9);
    let x = sol.witness.unwrap();
    for (xi, bi) in x.iter().zip(&qb.b_vec) {
        assert!((xi - (-qb.c / (bn * bn)) * bi).abs() < 1e-9);
    }
}

#[test]
fn min_norm_origin_inside_region() {
    let qb = QuadraticBoundary { a_mat: Matrix::identity(2), b_vec: vec![1.0, 0.0], c: -1.0 };
    let sol = min_norm_on_boundary(&qb, 1e-10).unwrap();
    assert_eq!(sol.value, 0.0);
}

#[test]
fn min_norm_empty_region() {
    // g = ||x||^2/2 + 1 > 0 everywhere
    let qb = QuadraticBoundary { a_mat: Matrix::identity(2), b_vec: vec![0.0, 0.0], c: 1.0 };
    let sol = min_norm_on_boundary(&qb, 1e-10).unwrap();
    assert!(sol.value.is_infinite());
    assert!(sol.witness.is_none());
}

#[test]
fn min_norm_pure_quadratic_negative_direction() {
    // g = c + (3 x0^2 - 0.75 x1^2)/2: feasible along x1 only
    let qb = QuadraticBoundary {
        a_mat: Matrix::diag(&[3.0, -0.75]),
        b_vec: vec![0.0, 0.0],
        c: 2f64.ln(),
    };
    let sol = min_norm_on_boundary(&qb, 1e-10).unwrap();
    let expect = (2.0 * 2f64.ln() / 0.75).sqrt();
    assert!((sol.value - expect).abs() < 1e-9);
    let oracle = grid_oracle(&qb, 3.0 * expect, 801);
    assert!((sol.value - oracle).abs() < 2e-2 * oracle);
}

#[test]
fn equal_covariances_reduce_to_whitened_gap() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for trial in 0..20 {
        let d = rng.gen_range(2..=4);
        let sigma = random_spd(d, 100 + trial, 0.5, 8.0);
        let gap: f64 = rng.gen_range(3.0..15.0);
        let dir = random_unit(d, &mut rng);
        let theta1: Vec<f64> = dir.iter().map(|x| x * gap).collect();
        let p = GmmParams {
            k: 2,
            d,
            centers: Matrix::from_rows(&[vec![0.0; d], theta1.clone()]),
            covariance: CovarianceSpec::Heterogeneous { sigmas: vec![sigma.clone(), sigma.clone()] },
        };
        let qb = boundary(&p, 0, 1).unwrap();
        let sol = min_norm_on_boundary(&qb, 1e-10).unwrap();
        let inv = crate::numkit::spd_inverse(&sigma).unwrap();
        let whitened = crate::numkit::dot(&theta1, &inv.matvec(&theta1)).sqrt();
        assert!(
            (2.0 * sol.value - whitened).abs() < 1e-7 * whitened,
            "trial {trial}: {} vs {}",
            2.0 * sol.value,
            whitened
        );
    }
}

#[test]
fn isotropic_large_scale_approximation() {
    // sigma_a = sigma_b = 10: pair value is 2 ||Xi|| / (sigma_a + sigma_b)
    let p = GmmParams {
        k: 2,
        d: 2,
        centers: Matrix::from_rows(&[vec![30.0, 0.0], vec![0.0, 0.0]]),
        covariance: CovarianceSpec::Heterogeneous {
            sigmas: vec![Matrix::identity(2).scale(100.0), Matrix::identity(2).scale(100.0)],
        },
    };
    let qb = boundary(&p, 0, 1).unwrap();
    let sol = min_norm_on_boundary(&qb, 1e-10).unwrap();
    let approx = 2.0 * 30.0 / 20.0;
    assert!((2.0 * sol.value - approx).abs() <= 0.05 * approx);
    let oracle = grid_oracle(&qb, 2.0 * sol.value.max(1.0), 400);
    assert!((2.0 * sol.value - 2.0 * oracle).abs() <= 0.05 * 2.0 * oracle);
}

#[test]
fn grid_oracle_matches_halfspace() {
    let qb = QuadraticBoundary { a_mat: Matrix::zeros(2, 2), b_vec: vec![3.0, 4.0], c: 10.0 };
    let expect = 2.0; // c / ||b||
    let oracle = grid_oracle(&qb, 5.0, 400);
    let spacing = 10.0 / 399.0;
    assert!(oracle >= expect - 1e-12 && oracle <= expect + 2.0 * spacing);
}

#[test]
fn grid_oracle_infeasible_radius() {
    let qb = QuadraticBoundary { a_mat: Matrix::zeros(2, 2), b_vec: vec![1.0, 0.0], c: 100.0 };
    // region starts at distance 100; search only radius 5
    assert!(grid_oracle(&qb, 5.0, 101).is_infinite());
}

#[test]
fn grid_fast_scan_matches_naive() {
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    for trial in 0..40 {
        let d = rng.gen_range(1..=3);
        let p = pair_params(d, 900 + trial, rng.gen_range(2.0..10.0), 0.5, 8.0);
        let qb = boundary(&p, 0, 1).unwrap();
        let radius = rng.gen_range(1.0..6.0);
        let res = 41;
        let fast = {
            let axes = vec![
                super::grid::Axis::linspace(-radius, radius, res);
                d
            ];
            super::grid::scan(&qb, &axes).map_or(f64::INFINITY, |(v, _)| v)
        };
        let naive = super::grid::naive_scan(&qb, radius, res);
        if fast.is_finite() || naive.is_finite() {
            assert!(
                (fast - naive).abs() <= 1e-9 * naive.abs().max(1.0),
                "trial {trial} d={d}: fast={fast} naive={naive}"
            );
        }
    }
}

#[test]
fn solver_matches_grid_oracle_sample() {
    // light version of the acceptance sweep
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let mut done = 0;
    let mut attempt = 0;
    while done < 25 {
        attempt += 1;
        let d = 2 + (done % 2);
        let gap = rng.gen_range(2.0..20.0);
        let p = pair_params(d, 3000 + attempt, gap, 0.5, 8.0);
        let qb = boundary(&p, 0, 1).unwrap();
        if qb.c < 0.5 {
            continue;
        }
        done += 1;
        let sol = min_norm_on_boundary(&qb, 1e-10).unwrap();
        let coarse = grid_oracle(&qb, 1.05 * upper_bound_half(&p), 100);
        assert!(coarse.is_finite());
        let r2 = coarse + 6.0 * 1.05 * upper_bound_half(&p) / 99.0;
        let oracle = grid_oracle(&qb, r2, 400);
        let dev = (2.0 * sol.value - 2.0 * oracle).abs();
        assert!(
            dev <= 1e-3 * 2.0 * oracle,
            "d={d} gap={gap}: solver {} oracle {}",
            2.0 * sol.value,
            oracle
        );
    }
}

/// Half of the closed-form upper bound on the pair value, used to size oracle
/// grids independently of the solver.
fn upper_bound_half(p: &GmmParams) -> f64 {
    let d = p.d as f64;
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for s in p.covariance.matrices() {
        let eig = sym_eig(s).unwrap();
        lo = lo.min(eig.eigenvalues[0]);
        hi = hi.max(*eig.eigenvalues.last().unwrap());
    }
    let gap = min_center_gap(p);
    0.5 * (gap / lo.sqrt() + (1.5 * d).sqrt() + (d * (hi / lo).ln()).sqrt())
}

#[test]
fn solver_feasibility_and_optimality_probes() {
    let mut rng = ChaCha8Rng::seed_from_u64(54);
    for trial in 0..5 {
        let p = pair_params(3, 4000 + trial, rng.gen_range(5.0..15.0), 0.5, 8.0);
        let qb = boundary(&p, 0, 1).unwrap();
        if qb.c <= 0.0 {
            continue;
        }
        let sol = min_norm_on_boundary(&qb, 1e-10).unwrap();
        let x = sol.witness.clone().unwrap();
        assert!(qb.g(&x).abs() <= 1e-10 * qb.c.abs().max(1.0));
        let mut feasible = 0;
        for _ in 0..10_000 {
            let probe: Vec<f64> = (0..3)
                .map(|_| rng.gen_range(-3.0 * sol.value - 5.0..3.0 * sol.value + 5.0))
                .collect();
            if qb.g(&probe) <= 0.0 {
                feasible += 1;
                assert!(sol.value <= norm(&probe) + 1e-9 * (1.0 + sol.value));
            }
        }
        assert!(feasible > 0, "probe box missed the region entirely");
    }
}

#[test]
fn rotation_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for trial in 0..10 {
        let p = pair_params(3, 5000 + trial, rng.gen_range(4.0..12.0), 0.5, 8.0);
        let qb = boundary(&p, 0, 1).unwrap();
        if qb.c <= 0.0 {
            continue;
        }
        let u = random_orthogonal(3, 999 + trial);
        let rotated = QuadraticBoundary {
            a_mat: u.matmul(&qb.a_mat).matmul(&u.transpose()).symmetrized(1e-9).unwrap(),
            b_vec: u.matvec(&qb.b_vec),
            c: qb.c,
        };
        let v1 = min_norm_on_boundary(&qb, 1e-10).unwrap().value;
        let v2 = min_norm_on_boundary(&rotated, 1e-10).unwrap().value;
        assert!((v1 - v2).abs() <= 1e-9 * v1.max(1.0));
    }
}

#[test]
fn hetero_report_on_homogeneous_params() {
    let sigma = random_spd(3, 7, 0.5, 4.0);
    let p = GmmParams {
        k: 3,
        d: 3,
        centers: Matrix::from_rows(&[
            vec![0.0, 0.0, 0.0],
            vec![6.0, 0.0, 0.0],
            vec![0.0, 7.0, 1.0],
        ]),
        covariance: CovarianceSpec::Homogeneous { sigma },
    };
    let report = snr_hetero(&p).unwrap();
    let snr = snr_homogeneous(&p).unwrap();
    assert!((report.snr_prime - snr).abs() < 1e-8 * snr);
    assert_eq!(report.snr, Some(snr));
    assert!(report.delta > 0.0);
    // every finite pair is at least the minimum
    for a in 0..3 {
        for b in 0..3 {
            if a != b {
                assert!(report.snr_pairs[a][b] >= report.snr_prime - 1e-9);
            }
        }
    }
}

#[test]
fn sim2_report_is_finite_and_sandwiched() {
    let p = make_sim2(11);
    let report = snr_hetero(&p).unwrap();
    assert!(report.snr_prime.is_finite() && report.snr_prime > 0.0);

    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for s in p.covariance.matrices() {
        let eig = sym_eig(s).unwrap();
        lo = lo.min(eig.eigenvalues[0]);
        hi = hi.max(*eig.eigenvalues.last().unwrap());
    }
    let d = p.d as f64;
    for a in 0..p.k {
        for b in 0..p.k {
            if a == b {
                continue;
            }
            let gap = crate::numkit::dist_sq(p.centers.row(a), p.centers.row(b)).sqrt();
            let lower = gap * (-hi.sqrt() + (hi + lo * (lo + hi) / (2.0 * hi)).sqrt()) / (lo + hi);
            let upper = gap / lo.sqrt() + (1.5 * d).sqrt() + (d * (hi / lo).ln()).sqrt();
            let pair = report.snr_pairs[a][b];
            assert!(pair >= lower && pair <= upper, "pair ({a},{b}) = {pair} not in [{lower},{upper}]");
        }
    }
}

#[test]
fn scale_invariance_of_snr_prime() {
    let base = make_sim2(13);
    let r0 = snr_hetero(&base).unwrap();
    for s in [0.1f64, 13.0] {
        let scaled = GmmParams {
            k: base.k,
            d: base.d,
            centers: base.centers.scale(s),
            covariance: match &base.covariance {
                CovarianceSpec::Heterogeneous { sigmas } => CovarianceSpec::Heterogeneous {
                    sigmas: sigmas.iter().map(|m| m.scale(s * s)).collect(),
                },
                CovarianceSpec::Homogeneous { sigma } => {
                    CovarianceSpec::Homogeneous { sigma: sigma.scale(s * s) }
                }
            },
        };
        let r1 = snr_hetero(&scaled).unwrap();
        assert!((r1.snr_prime - r0.snr_prime).abs() <= 1e-9 * r0.snr_prime);
    }
}
