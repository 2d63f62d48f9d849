//! Minimum-norm point on a quadric region `g(x) <= 0` with `g(0) > 0`.
//!
//! Stationary points of `||x||^2` on the boundary satisfy
//! `(I + mu A) x = -mu b` for a multiplier `mu > 0`. In the eigenbasis of `A`
//! with `v = U^T b` and the reciprocal variable `nu = 1/mu`, the candidate is
//! `y_i = -v_i / (nu + lambda_i)` and the boundary condition becomes the
//! secular equation
//!
//! `phi(nu) = c - sum_i v_i^2 (nu + lambda_i/2) / (nu + lambda_i)^2 = 0`.
//!
//! `phi` has poles at `nu = -lambda_i` for negative eigenvalues. The solver
//! brackets every sign change of `phi` on the pole-partitioned positive axis,
//! bisects each bracket, adds the degenerate-pole (hard case) candidates, and
//! returns the feasible candidate of least norm.

use super::{QuadraticBoundary, SnrError};
use crate::numkit::{norm, sym_eig};

/// Solver output. `witness` is `None` exactly when the region is empty, in
/// which case `value` is `+infinity`.
#[derive(Debug, Clone)]
pub struct MinNormSolution {
    pub value: f64,
    pub witness: Option<Vec<f64>>,
}

struct Secular {
    lambda: Vec<f64>,
    v: Vec<f64>,
    c: f64,
}

impl Secular {
    fn phi(&self, nu: f64) -> f64 {
        let mut sum = 0.0;
        for (&l, &vi) in self.lambda.iter().zip(&self.v) {
            if vi == 0.0 {
                continue;
            }
            let den = nu + l;
            sum += vi * vi * (nu + 0.5 * l) / (den * den);
        }
        self.c - sum
    }

    fn candidate(&self, nu: f64) -> Vec<f64> {
        self.lambda
            .iter()
            .zip(&self.v)
            .map(|(&l, &vi)| -vi / (nu + l))
            .collect()
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if (fmid > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-12 * hi.abs().max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Probe offsets in (0,1), dense near both endpoints to catch roots hugging a
/// pole. Roots closer to a pole than the innermost offset correspond to
/// candidates of astronomical norm and are never the minimum.
fn graded_offsets() -> Vec<f64> {
    let mut s = Vec::with_capacity(300);
    for e in 1..=14 {
        let base = 10f64.powi(-e);
        s.push(base);
        s.push(2.5 * base);
        s.push(5.0 * base);
        s.push(1.0 - base);
        s.push(1.0 - 2.5 * base);
        s.push(1.0 - 5.0 * base);
    }
    for i in 1..200 {
        s.push(i as f64 / 200.0);
    }
    s.retain(|x| *x > 0.0 && *x < 1.0);
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s.dedup();
    s
}

/// Minimum of `||x||` over `g(x) <= 0`.
///
/// Requires `g(0) = c > 0` for a nontrivial answer; with `c <= 0` the origin
/// is already in the region and the minimum is zero. A feasible candidate
/// must satisfy `|g(x)| <= tol * max(1, |c|)`; if every candidate misses that
/// bound the solve is retried once with the degenerate gradient components
/// perturbed, and failing that an error is returned.
pub fn min_norm_on_boundary(
    qb: &QuadraticBoundary,
    tol: f64,
) -> Result<MinNormSolution, SnrError> {
    let d = qb.dim();
    if qb.c <= 0.0 {
        return Ok(MinNormSolution { value: 0.0, witness: Some(vec![0.0; d]) });
    }
    let eig = sym_eig(&qb.a_mat)?;
    let lambda = eig.eigenvalues.clone();
    let u = &eig.eigenvectors;
    let v = u.transpose().matvec(&qb.b_vec);

    let lam_scale = lambda.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let eps_l = 1e-12 * lam_scale.max(1.0);
    let v_norm = norm(&v);
    let eps_v = 1e-12 * v_norm.max(1.0);

    let accept = |y: &[f64]| -> Option<(f64, Vec<f64>)> {
        let x = u.matvec(y);
        let resid = qb.g(&x);
        if resid.abs() <= tol * qb.c.abs().max(1.0) {
            Some((norm(&x), x))
        } else {
            None
        }
    };

    // Pure quadratic region: no linear term to trade against.
    if v_norm <= 1e-14 * (1.0 + lam_scale) {
        if lambda[0] < -eps_l {
            let w = (2.0 * qb.c / -lambda[0]).sqrt();
            let mut y = vec![0.0; d];
            y[0] = w;
            let x = u.matvec(&y);
            return Ok(MinNormSolution { value: norm(&x), witness: Some(x) });
        }
        return Ok(MinNormSolution { value: f64::INFINITY, witness: None });
    }

    // Empty-region test: with A positive semidefinite the infimum of g is
    // attained (or approached) at the unconstrained minimizer.
    if lambda[0] >= -eps_l {
        let mut inf_g = qb.c;
        let mut unbounded = false;
        for (&l, &vi) in lambda.iter().zip(&v) {
            if l > eps_l {
                inf_g -= vi * vi / (2.0 * l);
            } else if vi.abs() > eps_v {
                unbounded = true; // flat direction with slope: g sinks to -inf
            }
        }
        if !unbounded && inf_g > 0.0 {
            return Ok(MinNormSolution { value: f64::INFINITY, witness: None });
        }
    }

    let solve_pass = |v: &[f64]| -> Option<(f64, Vec<f64>)> {
        let sec = Secular { lambda: lambda.clone(), v: v.to_vec(), c: qb.c };

        // Pole positions on the positive nu axis, deduplicated.
        let mut poles: Vec<f64> = lambda
            .iter()
            .zip(v)
            .filter(|(&l, &vi)| l < -eps_l && vi.abs() > eps_v)
            .map(|(&l, _)| -l)
            .collect();
        poles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        poles.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs());

        // A flat-or-degenerate direction with gradient makes phi blow down at 0+.
        // Grow the upper end until phi is safely positive (phi -> c from below).
        let mut nu_hi = (2.0 * lam_scale).max(1.0);
        if let Some(&p) = poles.last() {
            nu_hi = nu_hi.max(2.0 * p);
        }
        let mut grow = 0;
        while sec.phi(nu_hi) <= 0.5 * qb.c && grow < 200 {
            nu_hi *= 2.0;
            grow += 1;
        }

        let mut cuts = vec![0.0];
        cuts.extend(poles.iter().copied());
        cuts.push(nu_hi);

        let offsets = graded_offsets();
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut consider = |cand: Option<(f64, Vec<f64>)>| {
            if let Some((val, x)) = cand {
                if best.as_ref().map_or(true, |(b, _)| val < *b) {
                    best = Some((val, x));
                }
            }
        };

        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi - lo <= 1e-300 {
                continue;
            }
            let mut prev: Option<(f64, f64)> = None;
            for &s in &offsets {
                let nu = lo + (hi - lo) * s;
                if nu <= lo || nu >= hi {
                    continue;
                }
                let val = sec.phi(nu);
                if !val.is_finite() {
                    prev = None;
                    continue;
                }
                if val == 0.0 {
                    consider(accept(&sec.candidate(nu)));
                } else if let Some((pnu, pval)) = prev {
                    if (pval > 0.0) != (val > 0.0) {
                        let root = bisect(|t| sec.phi(t), pnu, nu);
                        consider(accept(&sec.candidate(root)));
                    }
                }
                prev = Some((nu, val));
            }
        }

        // mu -> infinity limit: the unconstrained stationary point of g. Only
        // relevant when the region barely touches it; the residual check
        // decides.
        {
            let y: Vec<f64> = lambda
                .iter()
                .zip(v)
                .map(|(&l, &vi)| if l.abs() > eps_l { -vi / l } else { 0.0 })
                .collect();
            consider(accept(&y));
        }

        // Hard case: a negative eigenvalue whose whole eigenspace has zero
        // gradient. The candidate keeps the regular components at the pole and
        // spends the remaining budget along the degenerate direction.
        let mut p_idx = 0;
        while p_idx < lambda.len() {
            let l0 = lambda[p_idx];
            let mut group_end = p_idx + 1;
            while group_end < lambda.len()
                && (lambda[group_end] - l0).abs() <= 1e-9 * lam_scale.max(1.0)
            {
                group_end += 1;
            }
            if l0 < -eps_l && (p_idx..group_end).all(|i| v[i].abs() <= eps_v) {
                let pole = -l0;
                let mut y = vec![0.0; d];
                let mut g_fin = qb.c;
                for i in 0..d {
                    if (p_idx..group_end).contains(&i) {
                        continue;
                    }
                    let den = pole + lambda[i];
                    if den.abs() <= 1e-12 * lam_scale.max(1.0) {
                        g_fin = f64::NAN; // another pole collides; skip
                        break;
                    }
                    y[i] = -v[i] / den;
                    g_fin += v[i] * y[i] + 0.5 * lambda[i] * y[i] * y[i];
                }
                if g_fin.is_finite() && g_fin >= 0.0 {
                    y[p_idx] = (2.0 * g_fin / -l0).sqrt();
                    consider(accept(&y));
                }
            }
            p_idx = group_end;
        }

        best
    };

    if let Some((value, x)) = solve_pass(&v) {
        return Ok(MinNormSolution { value, witness: Some(x) });
    }

    // Degenerate-gradient retry: nudge the dead components and re-solve.
    let bump = 1e-10 * v_norm.max(1.0);
    let v2: Vec<f64> = v
        .iter()
        .map(|&vi| if vi.abs() <= eps_v { vi + bump } else { vi })
        .collect();
    if let Some((value, x)) = solve_pass(&v2) {
        return Ok(MinNormSolution { value, witness: Some(x) });
    }

    Err(SnrError::NumericalFailure(format!(
        "no boundary candidate met |g| <= {:.1e} (c = {:.3e}, d = {d})",
        tol * qb.c.abs().max(1.0),
        qb.c
    )))
}
