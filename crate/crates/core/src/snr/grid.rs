//! Brute-force grid oracle for the minimum-norm problem, for d <= 3.
//!
//! Scans a cube of lattice points, keeps the feasible point closest to the
//! origin, then rescans once at the same resolution inside the winning cell's
//! neighborhood. Feasibility along the innermost axis is resolved by the
//! quadratic formula instead of a loop, which leaves the result identical to
//! the naive full scan while removing a factor of `resolution` from the cost.

use super::QuadraticBoundary;

#[derive(Clone, Copy)]
pub(crate) struct Axis {
    start: f64,
    step: f64,
    count: usize,
}

impl Axis {
    pub(crate) fn linspace(lo: f64, hi: f64, count: usize) -> Axis {
        debug_assert!(count >= 2 && hi > lo);
        Axis { start: lo, step: (hi - lo) / (count - 1) as f64, count }
    }

    fn at(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    fn end(&self) -> f64 {
        self.at(self.count - 1)
    }

    /// Index range covered by `[lo, hi]`, clipped to the axis.
    fn index_range(&self, lo: f64, hi: f64) -> Option<(usize, usize)> {
        let lo = lo.max(self.start);
        let hi = hi.min(self.end());
        if lo > hi {
            return None;
        }
        let i_lo = ((lo - self.start) / self.step).ceil() as i64;
        let i_hi = ((hi - self.start) / self.step).floor() as i64;
        let i_lo = i_lo.clamp(0, self.count as i64 - 1) as usize;
        let i_hi = i_hi.clamp(0, self.count as i64 - 1) as usize;
        if self.at(i_lo) > hi || self.at(i_hi) < lo || i_lo > i_hi {
            None
        } else {
            Some((i_lo, i_hi))
        }
    }

    /// Index in `[i_lo, i_hi]` whose coordinate is closest to zero; |at(i)| is
    /// unimodal in i, so clamping the rounded crossing works.
    fn index_nearest_zero(&self, i_lo: usize, i_hi: usize) -> usize {
        let raw = (-self.start / self.step).round();
        (raw.max(0.0) as usize).clamp(i_lo, i_hi)
    }
}

/// Feasible t-intervals of `gamma t^2 + beta t + alpha <= 0`.
fn quadratic_intervals(gamma: f64, beta: f64, alpha: f64) -> Vec<(f64, f64)> {
    const ALL: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);
    if gamma == 0.0 {
        return if beta == 0.0 {
            if alpha <= 0.0 {
                vec![ALL]
            } else {
                vec![]
            }
        } else if beta > 0.0 {
            vec![(f64::NEG_INFINITY, -alpha / beta)]
        } else {
            vec![(-alpha / beta, f64::INFINITY)]
        };
    }
    let disc = beta * beta - 4.0 * gamma * alpha;
    if disc < 0.0 {
        return if gamma > 0.0 { vec![] } else { vec![ALL] };
    }
    let sgn = if beta >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (beta + sgn * disc.sqrt());
    let (r1, r2) = if q != 0.0 {
        let a = q / gamma;
        let b = alpha / q;
        (a.min(b), a.max(b))
    } else {
        (0.0, 0.0)
    };
    if gamma > 0.0 {
        vec![(r1, r2)]
    } else {
        vec![(f64::NEG_INFINITY, r1), (r2, f64::INFINITY)]
    }
}

/// Minimum-norm feasible lattice point, if any.
pub(crate) fn scan(qb: &QuadraticBoundary, axes: &[Axis]) -> Option<(f64, Vec<f64>)> {
    let d = axes.len();
    let last = d - 1;
    let a = &qb.a_mat;
    let b = &qb.b_vec;
    let gamma = 0.5 * a.get(last, last);

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut outer_idx = vec![0usize; last];
    let mut xo = vec![0.0f64; last];

    loop {
        for i in 0..last {
            xo[i] = axes[i].at(outer_idx[i]);
        }
        let outer_sq: f64 = xo.iter().map(|x| x * x).sum();
        if best.as_ref().map_or(true, |(v, _)| outer_sq < v * v) {
            let mut beta = b[last];
            let mut alpha = qb.c;
            for i in 0..last {
                beta += a.get(last, i) * xo[i];
                alpha += b[i] * xo[i];
                for j in 0..last {
                    alpha += 0.5 * a.get(i, j) * xo[i] * xo[j];
                }
            }
            for (lo, hi) in quadratic_intervals(gamma, beta, alpha) {
                if let Some((i_lo, i_hi)) = axes[last].index_range(lo, hi) {
                    let j0 = axes[last].index_nearest_zero(i_lo, i_hi);
                    // rounding at interval ends can leave an edge index
                    // marginally infeasible; consider a few neighbors and keep
                    // the feasible one closest to zero
                    let js = [j0, j0.saturating_sub(1), (j0 + 1).min(i_hi), i_lo, i_hi];
                    for &j in &js {
                        if j < i_lo || j > i_hi {
                            continue;
                        }
                        let t = axes[last].at(j);
                        let mut x = xo.clone();
                        x.push(t);
                        if qb.g(&x) <= 0.0 {
                            let val = (outer_sq + t * t).sqrt();
                            if best.as_ref().map_or(true, |(v, _)| val < *v) {
                                best = Some((val, x));
                            }
                        }
                    }
                }
            }
        }

        // odometer over the outer axes
        let mut k = 0;
        loop {
            if k == last {
                return best;
            }
            outer_idx[k] += 1;
            if outer_idx[k] < axes[k].count {
                break;
            }
            outer_idx[k] = 0;
            k += 1;
        }
    }
}

/// Exhaustive scan reference used to validate `scan` (exponential in d).
#[cfg(test)]
pub(crate) fn naive_scan(qb: &QuadraticBoundary, radius: f64, resolution: usize) -> f64 {
    let d = qb.dim();
    let axis = Axis::linspace(-radius, radius, resolution);
    let mut idx = vec![0usize; d];
    let mut best = f64::INFINITY;
    'outer: loop {
        let x: Vec<f64> = idx.iter().map(|&i| axis.at(i)).collect();
        if qb.g(&x) <= 0.0 {
            best = best.min(x.iter().map(|v| v * v).sum::<f64>().sqrt());
        }
        let mut k = 0;
        loop {
            if k == d {
                break 'outer;
            }
            idx[k] += 1;
            if idx[k] < resolution {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
    best
}

/// Upper bound on `min ||x||` over the region by lattice search: scan the cube
/// `[-radius, radius]^d`, then rescan once around the best cell. Returns
/// `+infinity` when no lattice point is feasible.
///
/// The rescan window must cover every point that could still undercut the
/// incumbent: along a gently curved boundary a competitor at lateral offset
/// `L` from the incumbent costs only `L^2 / (2 ||x||)` extra norm, so offsets
/// up to `sqrt(2 ||x|| * spacing * sqrt(d))` stay within one lattice error.
pub fn grid_oracle(qb: &QuadraticBoundary, radius: f64, resolution: usize) -> f64 {
    let d = qb.dim();
    assert!((1..=3).contains(&d), "grid oracle supports d in 1..=3");
    assert!(resolution >= 2, "need at least two points per axis");
    assert!(radius > 0.0 && radius.is_finite());

    let axes = vec![Axis::linspace(-radius, radius, resolution); d];
    let Some((coarse, point)) = scan(qb, &axes) else {
        return f64::INFINITY;
    };
    let spacing = 2.0 * radius / (resolution - 1) as f64;
    let lateral = (2.0 * (coarse + spacing) * spacing * (d as f64).sqrt()).sqrt();
    let half = (1.5 * spacing + lateral).min(radius);
    let refined: Vec<Axis> = point
        .iter()
        .map(|&ci| Axis::linspace(ci - half, ci + half, resolution))
        .collect();
    match scan(qb, &refined) {
        Some((fine, _)) if fine < coarse => fine,
        _ => coarse,
    }
}
