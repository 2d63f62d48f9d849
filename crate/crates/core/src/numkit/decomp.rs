use super::{Matrix, NumError};

/// Asymmetry allowed before an input is rejected rather than symmetrized.
const SYM_TOL: f64 = 1e-8;
/// Jacobi sweep cap.
const MAX_SWEEPS: usize = 100;

fn sym_input(s: &Matrix) -> Result<Matrix, NumError> {
    s.symmetrized(SYM_TOL * s.max_abs().max(1.0))
}

/// Cholesky factor `L` with `L L^T = S`, `L` lower triangular with positive
/// diagonal. Fails on any non-positive pivot.
pub fn chol_lower(s: &Matrix) -> Result<Matrix, NumError> {
    let a = sym_input(s)?;
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.get(i, j);
            for k in 0..j {
                sum -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if !(sum > 0.0) {
                    return Err(NumError::NotPositiveDefinite { index: i, pivot: sum });
                }
                l.set(i, i, sum.sqrt());
            } else {
                l.set(i, j, sum / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// Eigendecomposition of a symmetric matrix.
///
/// Eigenvalues are sorted ascending; `eigenvectors` holds the matching
/// orthonormal eigenvectors as columns, so `V diag(w) V^T` reconstructs the
/// input.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl SymEig {
    /// `V diag(f(w)) V^T` for a scalar spectral map `f`.
    pub fn apply_spectral(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut out = Matrix::zeros(n, n);
        for (k, &w) in self.eigenvalues.iter().enumerate() {
            let fw = f(w);
            if fw == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v.get(i, k);
                for j in 0..n {
                    out.set(i, j, out.get(i, j) + fw * vik * v.get(j, k));
                }
            }
        }
        out
    }
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// Rotations annihilate off-diagonal entries one at a time; the sweep repeats
/// until the off-diagonal Frobenius mass drops below `1e-12 * ||S||_F`.
pub fn sym_eig(s: &Matrix) -> Result<SymEig, NumError> {
    let mut a = sym_input(s)?;
    let n = a.rows();
    let mut v = Matrix::identity(n);
    let scale = a.frob_norm();
    let tol = 1e-12 * scale;

    let offdiag = |a: &Matrix| -> f64 {
        let mut sum = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                sum += 2.0 * a.get(i, j) * a.get(i, j);
            }
        }
        sum.sqrt()
    };

    let mut off = offdiag(&a);
    let mut sweeps = 0;
    while off > tol && scale > 0.0 {
        if sweeps >= MAX_SWEEPS {
            return Err(NumError::NoConvergence { sweeps, offdiag: off });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.abs() <= tol / (n as f64) {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = 0.5 * (aqq - app) / apq;
                // tan of the smaller rotation angle
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;

                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - sn * akq);
                    a.set(k, q, sn * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - sn * aqk);
                    a.set(q, k, sn * apk + c * aqk);
                }
                // rotation leaves tiny residue at (p,q); pin it to zero
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);

                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - sn * vkq);
                    v.set(k, q, sn * vkp + c * vkq);
                }
            }
        }
        off = offdiag(&a);
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).partial_cmp(&a.get(j, j)).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..n {
            eigenvectors.set(i, new_col, v.get(i, old_col));
        }
    }
    Ok(SymEig { eigenvalues, eigenvectors })
}

/// Inverse of a symmetric positive-definite matrix via Cholesky solves.
pub fn spd_inverse(s: &Matrix) -> Result<Matrix, NumError> {
    let l = chol_lower(s)?;
    let n = l.rows();
    let mut inv = Matrix::zeros(n, n);
    let mut y = vec![0.0; n];
    for col in 0..n {
        // forward solve L y = e_col
        for i in 0..n {
            let mut sum = if i == col { 1.0 } else { 0.0 };
            for k in 0..i {
                sum -= l.get(i, k) * y[k];
            }
            y[i] = sum / l.get(i, i);
        }
        // back solve L^T x = y
        for i in (0..n).rev() {
            let mut sum = y[i];
            for k in (i + 1)..n {
                sum -= l.get(k, i) * y[k];
            }
            y[i] = sum / l.get(i, i);
        }
        for i in 0..n {
            inv.set(i, col, y[i]);
        }
    }
    // exact symmetry for downstream symmetric-input checks
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (inv.get(i, j) + inv.get(j, i));
            inv.set(i, j, avg);
            inv.set(j, i, avg);
        }
    }
    Ok(inv)
}

/// `log det S` for SPD `S`, as `2 sum_i log L_ii`.
pub fn log_det_spd(s: &Matrix) -> Result<f64, NumError> {
    let l = chol_lower(s)?;
    Ok((0..l.rows()).map(|i| l.get(i, i).ln()).sum::<f64>() * 2.0)
}

/// Symmetric square root of an SPD matrix.
pub fn spd_sqrt(s: &Matrix) -> Result<Matrix, NumError> {
    chol_lower(s)?; // reject non-PD input up front
    let eig = sym_eig(s)?;
    Ok(eig.apply_spectral(|w| w.max(0.0).sqrt()))
}

/// Top-`r` singular values (descending) and right singular vectors (d x r)
/// of an n x d matrix, through the eigendecomposition of `M^T M`.
pub fn svd_topk(m: &Matrix, r: usize) -> Result<(Vec<f64>, Matrix), NumError> {
    let (n, d) = (m.rows(), m.cols());
    if r == 0 || r > n.min(d) {
        return Err(NumError::Dimension(format!(
            "rank {r} out of range for {n}x{d} matrix"
        )));
    }
    let gram = m.transpose().matmul(m);
    let eig = sym_eig(&gram)?;
    // eigenvalues ascend; singular values take the top end in reverse
    let mut values = Vec::with_capacity(r);
    let mut vectors = Matrix::zeros(d, r);
    for k in 0..r {
        let src = d - 1 - k;
        values.push(eig.eigenvalues[src].max(0.0).sqrt());
        for i in 0..d {
            vectors.set(i, k, eig.eigenvectors.get(i, src));
        }
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{dot, norm};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_spd(d: usize, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Matrix {
        // Q diag(w) Q^T with random rotation built from Jacobi-style 2x2 spins
        let mut q = Matrix::identity(d);
        for _ in 0..(3 * d) {
            let i = rng.gen_range(0..d);
            let mut j = rng.gen_range(0..d);
            if d > 1 {
                while j == i {
                    j = rng.gen_range(0..d);
                }
            } else {
                continue;
            }
            let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let (s, c) = angle.sin_cos();
            for k in 0..d {
                let qki = q.get(k, i);
                let qkj = q.get(k, j);
                q.set(k, i, c * qki - s * qkj);
                q.set(k, j, s * qki + c * qkj);
            }
        }
        let w: Vec<f64> = (0..d).map(|_| rng.gen_range(lo..hi)).collect();
        q.matmul(&Matrix::diag(&w)).matmul(&q.transpose())
    }

    #[test]
    fn chol_identity_and_diag() {
        let l = chol_lower(&Matrix::identity(3)).unwrap();
        assert!(l.sub(&Matrix::identity(3)).max_abs() < 1e-14);
        let l = chol_lower(&Matrix::diag(&[4.0, 9.0])).unwrap();
        assert!(l.sub(&Matrix::diag(&[2.0, 3.0])).max_abs() < 1e-14);
    }

    #[test]
    fn chol_rejects_indefinite() {
        let err = chol_lower(&Matrix::diag(&[1.0, -1.0])).unwrap_err();
        assert!(matches!(err, NumError::NotPositiveDefinite { index: 1, .. }));
    }

    #[test]
    fn chol_roundtrip_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let d = rng.gen_range(1..=10);
            let s = random_spd(d, &mut rng, 0.5, 8.0);
            let l = chol_lower(&s).unwrap();
            let rec = l.matmul(&l.transpose());
            assert!(rec.sub(&s).frob_norm() <= 1e-10 * s.frob_norm());
        }
    }

    #[test]
    fn sym_eig_diagonal_sorted() {
        let eig = sym_eig(&Matrix::diag(&[3.0, 1.0])).unwrap();
        assert!((eig.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((eig.eigenvalues[1] - 3.0).abs() < 1e-12);
        // eigenvectors are signed permutation columns
        for k in 0..2 {
            let col: Vec<f64> = (0..2).map(|i| eig.eigenvectors.get(i, k)).collect();
            assert!((norm(&col) - 1.0).abs() < 1e-12);
        }
        let eig = sym_eig(&Matrix::identity(4)).unwrap();
        assert!(eig.eigenvalues.iter().all(|w| (w - 1.0).abs() < 1e-12));
    }

    #[test]
    fn sym_eig_offdiagonal_pair() {
        // [[0,1],[1,0]] has eigenpairs (-1, (1,-1)/sqrt2) and (1, (1,1)/sqrt2)
        let s = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let eig = sym_eig(&s).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-12);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        for (k, expect) in [(0usize, [inv_sqrt2, -inv_sqrt2]), (1, [inv_sqrt2, inv_sqrt2])] {
            let col = [eig.eigenvectors.get(0, k), eig.eigenvectors.get(1, k)];
            let aligned = dot(&col, &expect).abs();
            assert!((aligned - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sym_eig_reconstructs_random_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let d = rng.gen_range(1..=10);
            let mut s = Matrix::zeros(d, d);
            for i in 0..d {
                for j in 0..=i {
                    let v: f64 = rng.gen_range(-2.0..2.0);
                    s.set(i, j, v);
                    s.set(j, i, v);
                }
            }
            let eig = sym_eig(&s).unwrap();
            let rec = eig.apply_spectral(|w| w);
            let denom = s.frob_norm().max(1e-12);
            assert!(rec.sub(&s).frob_norm() <= 1e-8 * denom);
            // V^T V = I
            let vtv = eig.eigenvectors.transpose().matmul(&eig.eigenvectors);
            assert!(vtv.sub(&Matrix::identity(d)).max_abs() < 1e-10);
            // ascending order
            assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn spd_ops_examples() {
        assert!((log_det_spd(&Matrix::diag(&[2.0, 8.0])).unwrap() - 16f64.ln()).abs() < 1e-12);
        let inv = spd_inverse(&Matrix::diag(&[2.0, 4.0])).unwrap();
        assert!(inv.sub(&Matrix::diag(&[0.5, 0.25])).max_abs() < 1e-14);
        let root = spd_sqrt(&Matrix::diag(&[4.0, 9.0])).unwrap();
        assert!(root.sub(&Matrix::diag(&[2.0, 3.0])).max_abs() < 1e-10);
    }

    #[test]
    fn spd_inverse_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let d = rng.gen_range(1..=8);
            let s = random_spd(d, &mut rng, 0.5, 8.0);
            let inv = spd_inverse(&s).unwrap();
            let prod = s.matmul(&inv);
            assert!(prod.sub(&Matrix::identity(d)).max_abs() < 1e-8);
        }
    }

    #[test]
    fn spd_sqrt_eigenvalues_are_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..30 {
            let d = rng.gen_range(1..=8);
            let s = random_spd(d, &mut rng, 0.5, 8.0);
            let root = spd_sqrt(&s).unwrap();
            assert!(root.matmul(&root).sub(&s).max_abs() < 1e-8 * s.max_abs().max(1.0));
            let ws = sym_eig(&s).unwrap().eigenvalues;
            let wr = sym_eig(&root).unwrap().eigenvalues;
            for (a, b) in ws.iter().zip(&wr) {
                assert!((a.sqrt() - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn svd_examples() {
        let (vals, vecs) = svd_topk(&Matrix::diag(&[5.0, 3.0]), 1).unwrap();
        assert!((vals[0] - 5.0).abs() < 1e-10);
        assert!((vecs.get(0, 0).abs() - 1.0).abs() < 1e-10);
        assert!(vecs.get(1, 0).abs() < 1e-10);

        // orthogonal rows with norms 2 and 1
        let m = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]);
        let (vals, _) = svd_topk(&m, 2).unwrap();
        assert!((vals[0] - 2.0).abs() < 1e-10 && (vals[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn svd_matches_gram_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let mut m = Matrix::zeros(10, 4);
        for i in 0..10 {
            for j in 0..4 {
                m.set(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        let (vals, vecs) = svd_topk(&m, 4).unwrap();
        let gram_eigs = sym_eig(&m.transpose().matmul(&m)).unwrap().eigenvalues;
        for k in 0..4 {
            assert!((vals[k] - gram_eigs[3 - k].max(0.0).sqrt()).abs() < 1e-9);
        }
        let vtv = vecs.transpose().matmul(&vecs);
        assert!(vtv.sub(&Matrix::identity(4)).max_abs() < 1e-8);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
    }
}
