//! Nesterov smoothing of `h(x) = max_{v in Q} v^T A x` with the prox-function
//! `d(v) = 1/2 ||v||^2` (strong convexity modulus `c = 1`):
//!
//! `h_mu(x) = max_{v in Q} { v^T A x - mu d(v) }`, with gradient `A^T v_mu(x)`.
//!
//! For l1, `Q` is the unit box in `R^p`; for group norms it is the product of
//! one unit Euclidean ball per group.

use crate::error::{Error, Result};
use crate::regularizers::{DualVector, GroupStructure, Penalty, Regularizer};
use crate::vector::{norm_slice, DenseVector};

/// Smoothing parameter used when `||A|| = 0` makes the usual schedule
/// degenerate.
pub const MU_FLOOR: f64 = 1e-12;

/// Strong convexity modulus of `d(v) = 1/2 ||v||^2`.
pub const PROX_FUNCTION_MODULUS: f64 = 1.0;

/// Result of [`mu_schedule`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuSchedule {
    pub mu: f64,
    /// True when `||A|| = 0`, i.e. `h = 0` and smoothing does nothing.
    pub inert: bool,
}

/// `mu = ||A|| / (N + 2)`, floored at [`MU_FLOOR`] (and flagged inert) when
/// `||A|| = 0`.
pub fn mu_schedule(a_norm: f64, iterations: usize) -> MuSchedule {
    if a_norm <= 0.0 {
        MuSchedule {
            mu: MU_FLOOR,
            inert: true,
        }
    } else {
        MuSchedule {
            mu: a_norm / (iterations as f64 + 2.0),
            inert: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SmoothedRegularizer {
    base: Regularizer,
    p: usize,
    mu: f64,
    a_norm: f64,
    m: f64,
    /// Per group: `(lambda w_g, mu / (lambda w_g), (lambda w_g)^2 / mu)`.
    group_coefs: Vec<(f64, f64, f64)>,
}

impl SmoothedRegularizer {
    /// Smooths `base` on `R^p` with parameter `mu > 0`.
    pub fn new(base: Regularizer, p: usize, mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::Parameter(format!("smoothing parameter mu must be positive, got {mu}")));
        }
        let a_norm = base.linear_map(p)?.operator_norm();
        let m = match base.penalty() {
            Penalty::L1 => p as f64 / 2.0,
            Penalty::Group(s) => s.len() as f64 / 2.0,
        };
        let group_coefs = match base.penalty() {
            Penalty::Group(s) => s
                .weights()
                .iter()
                .map(|w| {
                    let lw = base.lambda() * w;
                    (lw, mu / lw, lw * lw / mu)
                })
                .collect(),
            Penalty::L1 => Vec::new(),
        };
        Ok(SmoothedRegularizer {
            base,
            p,
            mu,
            a_norm,
            m,
            group_coefs,
        })
    }

    /// Uses `mu = ||A|| / (N + 2)`.
    pub fn with_schedule(base: Regularizer, p: usize, iterations: usize) -> Result<Self> {
        let a_norm = base.linear_map(p)?.operator_norm();
        Self::new(base, p, mu_schedule(a_norm, iterations).mu)
    }

    pub fn base(&self) -> &Regularizer {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn a_norm(&self) -> f64 {
        self.a_norm
    }

    /// `M = max_{v in Q} d(v)`.
    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn c(&self) -> f64 {
        PROX_FUNCTION_MODULUS
    }

    pub fn is_inert(&self) -> bool {
        self.a_norm == 0.0
    }

    /// The unique maximizer `v_mu(x)`, laid out like the rows of `A`.
    pub fn maximizer(&self, x: &DenseVector) -> Result<DualVector> {
        x.check_len(self.p)?;
        let x = x.as_slice();
        let lambda = self.base.lambda();
        let v = match self.base.penalty() {
            Penalty::L1 => x.iter().map(|xi| (lambda * xi / self.mu).clamp(-1.0, 1.0)).collect(),
            Penalty::Group(s) => {
                let mut out = Vec::with_capacity(s.total_size());
                for (g, w) in s.groups().iter().zip(s.weights()) {
                    let start = out.len();
                    let c = lambda * w / self.mu;
                    out.extend(g.iter().map(|&i| c * x[i]));
                    let block = &mut out[start..];
                    let n = norm_slice(block);
                    if n > 1.0 {
                        block.iter_mut().for_each(|b| *b /= n);
                    }
                }
                out
            }
        };
        Ok(DualVector::new(v))
    }

    /// `h_mu(x) = v_mu^T A x - mu/2 ||v_mu||^2`.
    pub fn smoothed_value(&self, x: &DenseVector) -> Result<f64> {
        let v = self.maximizer(x)?;
        let ax = self.base.linear_map(self.p)?.apply(x)?;
        let vv = v.dot(&v)?;
        Ok(v.dot(&ax)? - 0.5 * self.mu * vv)
    }

    /// `grad h_mu(x) = A^T v_mu(x)`.
    pub fn smoothed_gradient(&self, x: &DenseVector) -> Result<DenseVector> {
        x.check_len(self.p)?;
        let mut out = vec![0.0; self.p];
        self.add_gradient(x.as_slice(), &mut out);
        Ok(DenseVector::from_vec_unchecked(out))
    }

    /// Adds `A^T v_mu(x)` to `out` without materializing `v_mu`.
    pub(crate) fn add_gradient(&self, x: &[f64], out: &mut [f64]) {
        let lambda = self.base.lambda();
        if lambda == 0.0 {
            return;
        }
        match self.base.penalty() {
            Penalty::L1 => {
                for (o, xi) in out.iter_mut().zip(x) {
                    *o += lambda * (lambda * xi / self.mu).clamp(-1.0, 1.0);
                }
            }
            Penalty::Group(s) => add_group_gradient(s, &self.group_coefs, x, out),
        }
    }

    /// `L_mu = L + ||A||^2 / (c mu)`; equals `L` when smoothing is inert.
    pub fn lipschitz(&self, l: f64) -> Result<f64> {
        lipschitz_mu(l, self)
    }
}

/// Per group: `v_g = a_g x_g / max(1, a_g ||x_g||)` with `a_g = lambda w_g / mu`,
/// accumulated as `lambda w_g v_g`. The ball constraint is active when
/// `||x_g|| > mu / (lambda w_g)`.
fn add_group_gradient(s: &GroupStructure, coefs: &[(f64, f64, f64)], x: &[f64], out: &mut [f64]) {
    for (g, &(lw, threshold, lw2_over_mu)) in s.groups().iter().zip(coefs) {
        let norm = g.iter().map(|&i| x[i] * x[i]).sum::<f64>().sqrt();
        let coef = if norm > threshold { lw / norm } else { lw2_over_mu };
        for &i in g {
            out[i] += coef * x[i];
        }
    }
}

/// `L_mu = L + ||A||^2 / (c mu)`.
pub fn lipschitz_mu(l: f64, s: &SmoothedRegularizer) -> Result<f64> {
    if !(l.is_finite() && l >= 0.0) {
        return Err(Error::Parameter(format!("Lipschitz constant must be >= 0, got {l}")));
    }
    if s.is_inert() {
        return Ok(l);
    }
    Ok(l + s.a_norm * s.a_norm / (s.c() * s.mu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use composite_sgd_oracles as oracle;

    fn v(values: &[f64]) -> DenseVector {
        DenseVector::from_vec(values.to_vec()).unwrap()
    }

    fn l1(lambda: f64, p: usize, mu: f64) -> SmoothedRegularizer {
        SmoothedRegularizer::new(Regularizer::l1(lambda).unwrap(), p, mu).unwrap()
    }

    #[test]
    fn maximizer_examples() {
        let s = l1(0.1, 2, 0.05);
        let m = s.maximizer(&v(&[1.0, -0.2])).unwrap();
        assert!((m.as_slice()[0] - 1.0).abs() < 1e-15);
        assert!((m.as_slice()[1] + 0.4).abs() < 1e-15);
        // each coordinate maximizes lambda x v - mu/2 v^2 over [-1, 1]
        for (i, xi) in [1.0, -0.2].iter().enumerate() {
            let best = oracle::golden_section_min(|t| -(0.1 * xi * t - 0.025 * t * t), -1.0, 1.0, 1e-12);
            assert!((best - m.as_slice()[i]).abs() < 1e-6);
        }

        assert!(s.maximizer(&DenseVector::zeros(2)).unwrap().as_slice().iter().all(|&x| x == 0.0));

        let grp = GroupStructure::new(2, vec![vec![0, 1]], vec![1.0]).unwrap();
        let sg = SmoothedRegularizer::new(Regularizer::group(1.0, grp).unwrap(), 2, 10.0).unwrap();
        let m = sg.maximizer(&v(&[3.0, 4.0])).unwrap();
        assert!((m.as_slice()[0] - 0.3).abs() < 1e-15 && (m.as_slice()[1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn smoothed_value_example_against_grid() {
        let s = l1(0.1, 2, 0.05);
        let x = v(&[1.0, -0.2]);
        let value = s.smoothed_value(&x).unwrap();
        assert!((value - 0.079).abs() < 1e-12);
        let h = s.base().evaluate(&x).unwrap();
        assert!((h - 0.12).abs() < 1e-15);
        assert!(value <= h && h <= value + 0.05 * s.m());
        assert_eq!(s.m(), 1.0);

        let (grid, _) = oracle::grid_max_2d(
            |a, b| 0.1 * (a * 1.0 + b * -0.2) - 0.025 * (a * a + b * b),
            -1.0,
            1.0,
            1e-3,
        );
        assert!((grid - value).abs() < 1e-6);
    }

    #[test]
    fn smoothed_value_decreases_in_mu() {
        let x = v(&[0.4, -1.3, 2.0]);
        let mut last = f64::INFINITY;
        for k in 0..40 {
            let mu = 1e-3 * 1.5f64.powi(k);
            let val = l1(0.3, 3, mu).smoothed_value(&x).unwrap();
            assert!(val <= last + 1e-15);
            last = val;
        }
        assert!(last < 1e-3);
        assert_eq!(l1(0.3, 3, 1.0).smoothed_value(&DenseVector::zeros(3)).unwrap(), 0.0);
    }

    #[test]
    fn gradient_examples() {
        let s = l1(0.5, 3, 0.01);
        let x = v(&[1.0, -2.0, 0.3]);
        let g = s.smoothed_gradient(&x).unwrap();
        assert_eq!(g, v(&[0.5, -0.5, 0.5]));
        assert!(s.smoothed_gradient(&DenseVector::zeros(3)).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn gradient_equals_adjoint_of_maximizer() {
        let mut rng = RngStream::new(1);
        let reg = Regularizer::group(0.2, GroupStructure::hierarchical(3).unwrap()).unwrap();
        let s = SmoothedRegularizer::new(reg.clone(), 8, 0.07).unwrap();
        for _ in 0..50 {
            let x = v(&(0..8).map(|_| rng.gaussian()).collect::<Vec<_>>());
            let via_adjoint = reg.linear_map(8).unwrap().adjoint(&s.maximizer(&x).unwrap()).unwrap();
            let fused = s.smoothed_gradient(&x).unwrap();
            for (a, b) in via_adjoint.iter().zip(fused.iter()) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn maximizer_is_feasible() {
        let mut rng = RngStream::new(2);
        let reg = Regularizer::group(1.0, GroupStructure::hierarchical(4).unwrap()).unwrap();
        let s = SmoothedRegularizer::new(reg, 16, 1e-3).unwrap();
        let structure = s.base().structure().unwrap().clone();
        for _ in 0..100 {
            let x = v(&(0..16).map(|_| 3.0 * rng.gaussian()).collect::<Vec<_>>());
            let m = s.maximizer(&x).unwrap();
            for k in 0..structure.len() {
                assert!(norm_slice(&m.as_slice()[structure.block(k)]) <= 1.0 + 1e-15);
            }
        }
    }

    #[test]
    fn lipschitz_examples() {
        let s = l1(0.1, 4, 0.05);
        assert!((lipschitz_mu(1.0, &s).unwrap() - 1.2).abs() < 1e-12);
        let zero = l1(0.0, 4, 0.05);
        assert_eq!(lipschitz_mu(3.0, &zero).unwrap(), 3.0);
        let sched = SmoothedRegularizer::with_schedule(Regularizer::l1(0.1).unwrap(), 4, 98).unwrap();
        assert!((lipschitz_mu(1.0, &sched).unwrap() - 11.0).abs() < 1e-9);
        assert!(lipschitz_mu(-1.0, &s).is_err());
    }

    #[test]
    fn mu_schedule_examples() {
        let m = mu_schedule(0.1, 98);
        assert!((m.mu - 0.001).abs() < 1e-18 && !m.inert);
        assert_eq!(mu_schedule(0.0, 98), MuSchedule { mu: MU_FLOOR, inert: true });
        assert_eq!(mu_schedule(1.0, 0).mu, 0.5);
    }

    #[test]
    fn rejects_non_positive_mu() {
        let reg = Regularizer::l1(0.1).unwrap();
        assert!(matches!(SmoothedRegularizer::new(reg.clone(), 3, 0.0), Err(Error::Parameter(_))));
        assert!(SmoothedRegularizer::new(reg, 3, -1.0).is_err());
    }

    #[test]
    fn m_constants() {
        assert_eq!(l1(0.1, 20, 1.0).m(), 10.0);
        let reg = Regularizer::group(0.1, GroupStructure::hierarchical(5).unwrap()).unwrap();
        let s = SmoothedRegularizer::new(reg, 32, 1.0).unwrap();
        assert_eq!(s.m(), 31.5);
        assert_eq!(s.c(), 1.0);
    }
}
