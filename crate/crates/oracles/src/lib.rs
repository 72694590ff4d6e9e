//! Independent reference computations for the test suites.
//!
//! Nothing here shares code with the library under test: inputs are plain
//! slices and the algorithms are deliberately different from the ones the
//! library uses (dense materialization, power iteration, randomized dual
//! block maximization with a gap certificate, finite differences,
//! exhaustive grids).

use nalgebra::{DMatrix, SymmetricEigen};

/// Dense `A` with rows indexed by `(i, g)` pairs (`i in g`, groups in order)
/// and `A[(i,g), j] = lambda * w_g` when `i == j`.
pub fn materialize_group_map(lambda: f64, groups: &[Vec<usize>], weights: &[f64], p: usize) -> Vec<Vec<f64>> {
    let mut rows = Vec::new();
    for (g, w) in groups.iter().zip(weights) {
        for &i in g {
            let mut row = vec![0.0; p];
            row[i] = lambda * w;
            rows.push(row);
        }
    }
    rows
}

/// Spectral norm by power iteration on `A^T A`, iterated until the
/// Rayleigh quotient changes by less than `tol` (relative).
pub fn spectral_norm_power_iteration(a: &[Vec<f64>], tol: f64) -> f64 {
    let p = a.first().map_or(0, |r| r.len());
    if p == 0 {
        return 0.0;
    }
    let mut x: Vec<f64> = (0..p).map(|j| 1.0 + 0.01 * j as f64).collect();
    normalize(&mut x);
    let mut prev = 0.0;
    for _ in 0..100_000 {
        let ax: Vec<f64> = a.iter().map(|row| dot(row, &x)).collect();
        let mut atax = vec![0.0; p];
        for (row, s) in a.iter().zip(&ax) {
            for j in 0..p {
                atax[j] += row[j] * s;
            }
        }
        let rq = dot(&x, &atax);
        x = atax;
        if normalize(&mut x) == 0.0 {
            return 0.0;
        }
        if (rq - prev).abs() <= tol * rq.abs().max(f64::MIN_POSITIVE) {
            return rq.sqrt();
        }
        prev = rq;
    }
    prev.sqrt()
}

/// Largest eigenvalue of a dense symmetric matrix via a full
/// eigendecomposition.
pub fn max_symmetric_eigenvalue(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let dm = DMatrix::from_fn(n, n, |i, j| m[i][j]);
    let eig = SymmetricEigen::new(dm);
    eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// `X^T X` for a row-major `k x p` matrix.
pub fn gram(x: &[f64], k: usize, p: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; p]; p];
    for r in 0..k {
        let row = &x[r * p..(r + 1) * p];
        for i in 0..p {
            for j in 0..p {
                out[i][j] += row[i] * row[j];
            }
        }
    }
    out
}

/// Reference solution of `min_x 1/2 ||x - u||^2 + sum_g t_g ||x_g||` for an
/// arbitrary group family.
///
/// Maximizes the dual `max_{||xi_g|| <= t_g} 1/2||u||^2 - 1/2||u - sum_g xi_g||^2`
/// by exact block maximization, visiting groups in a fresh pseudo-random
/// order every sweep, and stops once the duality gap is at most `gap_tol`
/// and a sweep changes nothing by more than 1e-15. Returns the primal point
/// `u - sum_g xi_g` and the final gap.
pub fn group_prox_reference(u: &[f64], groups: &[Vec<usize>], thresholds: &[f64], gap_tol: f64) -> (Vec<f64>, f64) {
    let primal_obj = |x: &[f64]| {
        let q: f64 = x.iter().zip(u).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() * 0.5;
        let pen: f64 = groups
            .iter()
            .zip(thresholds)
            .map(|(g, t)| t * g.iter().map(|&i| x[i] * x[i]).sum::<f64>().sqrt())
            .sum();
        q + pen
    };
    let dual_obj = |x: &[f64]| 0.5 * dot(u, u) - 0.5 * dot(x, x);

    let mut xi: Vec<Vec<f64>> = groups.iter().map(|g| vec![0.0; g.len()]).collect();
    let mut x = u.to_vec();
    let mut order: Vec<usize> = (0..groups.len()).collect();
    let mut state = 0x9E37_79B9_7F4A_7C15u64;
    let mut gap = f64::INFINITY;
    for _ in 0..1_000_000usize {
        // Fisher-Yates with a xorshift generator
        for i in (1..order.len()).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            order.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let mut change = 0.0f64;
        for &k in &order {
            let g = &groups[k];
            // residual with this block's contribution removed
            let mut r: Vec<f64> = g.iter().enumerate().map(|(j, &i)| x[i] + xi[k][j]).collect();
            let n = dot(&r, &r).sqrt();
            let t = thresholds[k];
            let scale = if n > t { t / n } else { 1.0 };
            for (j, &i) in g.iter().enumerate() {
                let new_xi = r[j] * scale;
                change = change.max((new_xi - xi[k][j]).abs());
                xi[k][j] = new_xi;
                r[j] -= new_xi;
                x[i] = r[j];
            }
        }
        gap = primal_obj(&x) - dual_obj(&x);
        if gap <= gap_tol && change <= 1e-15 {
            break;
        }
    }
    (x, gap)
}

/// Central finite-difference gradient with step `h`.
pub fn central_difference<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Maximum of `f` over the box `[lo, hi]^2` on a uniform grid.
pub fn grid_max_2d<F: Fn(f64, f64) -> f64>(f: F, lo: f64, hi: f64, step: f64) -> (f64, [f64; 2]) {
    let n = ((hi - lo) / step).round() as usize;
    let mut best = (f64::NEG_INFINITY, [lo, lo]);
    for i in 0..=n {
        let a = lo + i as f64 * step;
        for j in 0..=n {
            let b = lo + j as f64 * step;
            let v = f(a, b);
            if v > best.0 {
                best = (v, [a, b]);
            }
        }
    }
    best
}

/// Minimizes a one-dimensional strictly convex function on `[lo, hi]` by
/// golden-section search.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    while (hi - lo).abs() > tol {
        if f(c) < f(d) {
            hi = d;
        } else {
            lo = c;
        }
        c = hi - r * (hi - lo);
        d = lo + r * (hi - lo);
    }
    0.5 * (lo + hi)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) -> f64 {
    let n = dot(x, x).sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_iteration_on_diagonal() {
        let a = vec![vec![3.0, 0.0], vec![0.0, -5.0]];
        assert!((spectral_norm_power_iteration(&a, 1e-14) - 5.0).abs() < 1e-9);
    }

    #[test]
    fn eigen_of_known_matrix() {
        let m = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        assert!((max_symmetric_eigenvalue(&m) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn reference_prox_soft_thresholds_singletons() {
        let u = [1.0, -0.3, 2.0];
        let groups = vec![vec![0], vec![1], vec![2]];
        let (x, gap) = group_prox_reference(&u, &groups, &[0.5, 0.5, 0.5], 1e-14);
        assert!(gap <= 1e-14);
        for (a, b) in x.iter().zip([0.5, 0.0, 1.5]) {
            assert!((a - b).abs() < 1e-7, "{x:?}");
        }
    }

    #[test]
    fn golden_section_quadratic() {
        let m = golden_section_min(|x| (x - 0.7) * (x - 0.7), -3.0, 3.0, 1e-10);
        assert!((m - 0.7).abs() < 1e-8);
    }
}
