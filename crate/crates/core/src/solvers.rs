//! Accelerated stochastic gradient methods for `phi(x) = f(x) + h(x)`.
//!
//! All three methods share one loop. With `theta_t = 2/(t+2)` and
//! `x_0 = z_0 = 0`, for `t = 0..=N`:
//!
//! ```text
//! y_t     = (1 - theta_t) x_t + theta_t z_t
//! z_{t+1} = step(z_t, G(y_t, xi_t), eta_t)
//! x_{t+1} = (1 - theta_t) x_t + theta_t z_{t+1}
//! ```
//!
//! and the output is `x_{N+1}`. They differ in the step:
//!
//! - [`run_sg`] takes the exact prox of `h` with weight
//!   `eta_t = gamma_t L`, `gamma_t = 2/(t+2) (N^{3/2}/L + 2)`;
//! - [`run_ssg`] replaces `h` by its smoothed version `h_mu` and takes a
//!   plain gradient step of length `1/(gamma_t L_mu)`;
//! - [`run_acsa`] takes the prox with `eta_t = 2 gamma* / (t+1)`.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::problems::StochasticOracle;
use crate::regularizers::Regularizer;
use crate::rng::RngStream;
use crate::smoothing::SmoothedRegularizer;
use crate::trace::TraceRecord;
use crate::vector::DenseVector;

/// Any iterate coordinate above this magnitude aborts the run.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Number of oracle draws used to estimate `sigma^2` for AC-SA.
pub const PILOT_DRAWS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
enum StepRule {
    Accelerated,
    Acsa { gamma_star: f64 },
}

/// Step-size schedule for `t = 0..=N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    iterations: usize,
    l_eff: f64,
    rule: StepRule,
}

impl Schedule {
    /// `gamma_t = 2/(t+2) (N^{3/2}/L + 2)`; `l_eff` is `L` for SG and
    /// `L_mu` for SSG.
    pub fn accelerated(iterations: usize, l_eff: f64) -> Result<Self> {
        check_iterations(iterations)?;
        if !(l_eff.is_finite() && l_eff > 0.0) {
            return Err(Error::Parameter(format!("Lipschitz constant must be > 0, got {l_eff}")));
        }
        Ok(Schedule {
            iterations,
            l_eff,
            rule: StepRule::Accelerated,
        })
    }

    /// `gamma_t = 2 gamma* / (L (t+1))`.
    pub fn acsa(iterations: usize, l: f64, params: &AcsaParams) -> Result<Self> {
        let mut s = Schedule::accelerated(iterations, l)?;
        s.rule = StepRule::Acsa {
            gamma_star: params.gamma_star,
        };
        Ok(s)
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn lipschitz(&self) -> f64 {
        self.l_eff
    }

    pub fn theta(&self, t: usize) -> f64 {
        2.0 / (t as f64 + 2.0)
    }

    pub fn gamma(&self, t: usize) -> f64 {
        match self.rule {
            StepRule::Accelerated => {
                let n = self.iterations as f64;
                2.0 / (t as f64 + 2.0) * (n * n.sqrt() / self.l_eff + 2.0)
            }
            StepRule::Acsa { gamma_star } => 2.0 * gamma_star / (self.l_eff * (t as f64 + 1.0)),
        }
    }

    /// The prox weight `eta_t = gamma_t L`.
    pub fn eta(&self, t: usize) -> f64 {
        self.gamma(t) * self.l_eff
    }
}

fn check_iterations(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Parameter("iteration count N must be >= 1".into()));
    }
    Ok(())
}

/// Parameters of the AC-SA step rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcsaParams {
    pub gamma_star: f64,
    pub sigma_sq: f64,
    pub d: f64,
}

impl AcsaParams {
    /// `gamma* = max(2L, sqrt(2 sigma^2 N (N+1) (N+2) / (3 D^2)))`.
    pub fn derive(l: f64, iterations: usize, sigma_sq: f64, d: f64) -> Result<Self> {
        check_iterations(iterations)?;
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::Parameter(format!("Lipschitz constant must be > 0, got {l}")));
        }
        if !(sigma_sq.is_finite() && sigma_sq >= 0.0) {
            return Err(Error::Parameter(format!("sigma^2 must be >= 0, got {sigma_sq}")));
        }
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::Parameter(format!("D must be > 0, got {d}")));
        }
        let n = iterations as f64;
        let noise_term = (2.0 * sigma_sq * n * (n + 1.0) * (n + 2.0) / (3.0 * d * d)).sqrt();
        Ok(AcsaParams {
            gamma_star: (2.0 * l).max(noise_term),
            sigma_sq,
            d,
        })
    }

    /// Estimates `sigma^2` from [`PILOT_DRAWS`] oracle draws at the origin
    /// and derives `gamma*` from it.
    pub fn from_pilot<O: StochasticOracle + ?Sized>(
        oracle: &O,
        pilot_rng: &mut RngStream,
        l: f64,
        iterations: usize,
        d: f64,
    ) -> Result<Self> {
        let sigma_sq = pilot_sigma_sq(oracle, pilot_rng, PILOT_DRAWS)?;
        AcsaParams::derive(l, iterations, sigma_sq, d)
    }
}

/// Mean squared deviation of `draws` oracle samples at `x = 0` from the
/// exact gradient there.
pub fn pilot_sigma_sq<O: StochasticOracle + ?Sized>(oracle: &O, rng: &mut RngStream, draws: usize) -> Result<f64> {
    if draws == 0 {
        return Err(Error::Parameter("pilot needs at least one draw".into()));
    }
    let p = oracle.dim();
    let x = vec![0.0; p];
    let mut exact = vec![0.0; p];
    oracle.gradient_into(&x, &mut exact);
    let mut g = vec![0.0; p];
    let mut total = 0.0;
    for _ in 0..draws {
        oracle.sample_into(&x, rng, &mut g);
        total += g.iter().zip(&exact).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    let s = total / draws as f64;
    if !s.is_finite() {
        return Err(Error::NonFinite("pilot_sigma_sq"));
    }
    Ok(s)
}

/// Final iterate and objective trace of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOutput {
    pub x: DenseVector,
    pub trace: Vec<TraceRecord>,
    /// Time spent in the iteration loop, excluding trace evaluations.
    pub solve_seconds: f64,
}

impl SolverOutput {
    pub fn final_objective(&self) -> f64 {
        self.trace.last().map(|r| r.objective).unwrap_or(f64::NAN)
    }
}

/// Iterates of the shared loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub t: usize,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub y: Vec<f64>,
}

impl SolverState {
    fn new(p: usize) -> Self {
        SolverState {
            t: 0,
            x: vec![0.0; p],
            z: vec![0.0; p],
            y: vec![0.0; p],
        }
    }
}

/// Runs SG: the exact prox of `reg` at every step.
pub fn run_sg<O: StochasticOracle + ?Sized>(
    oracle: &O,
    reg: &Regularizer,
    l: f64,
    iterations: usize,
    rng: &mut RngStream,
    trace_every: usize,
) -> Result<SolverOutput> {
    reg.check_dim(oracle.dim())?;
    let schedule = Schedule::accelerated(iterations, l)?;
    run_prox_loop(oracle, reg, &schedule, rng, trace_every)
}

/// Runs AC-SA with the given `gamma*`.
pub fn run_acsa<O: StochasticOracle + ?Sized>(
    oracle: &O,
    reg: &Regularizer,
    l: f64,
    iterations: usize,
    params: &AcsaParams,
    rng: &mut RngStream,
    trace_every: usize,
) -> Result<SolverOutput> {
    reg.check_dim(oracle.dim())?;
    let schedule = Schedule::acsa(iterations, l, params)?;
    run_prox_loop(oracle, reg, &schedule, rng, trace_every)
}

fn run_prox_loop<O: StochasticOracle + ?Sized>(
    oracle: &O,
    reg: &Regularizer,
    schedule: &Schedule,
    rng: &mut RngStream,
    trace_every: usize,
) -> Result<SolverOutput> {
    let phi = |x: &[f64]| oracle.objective(x) + reg.evaluate_slice(x);
    run_loop(oracle, schedule, rng, trace_every, phi, |t, g, z, eta| {
        for (zi, gi) in z.iter_mut().zip(g.iter()) {
            *zi -= gi / eta;
        }
        reg.prox_shifted(z, eta).map_err(|e| Error::AtIteration {
            iteration: t,
            source: Box::new(e),
        })
    })
}

/// Runs SSG on the smoothed regularizer. `l` is the Lipschitz constant of
/// `grad f`; the step uses `L_mu`. Traces report the unsmoothed objective.
pub fn run_ssg<O: StochasticOracle + ?Sized>(
    oracle: &O,
    smoothed: &SmoothedRegularizer,
    l: f64,
    iterations: usize,
    rng: &mut RngStream,
    trace_every: usize,
) -> Result<SolverOutput> {
    let p = oracle.dim();
    if smoothed.dim() != p {
        return Err(Error::Dimension {
            expected: smoothed.dim(),
            found: p,
        });
    }
    let schedule = Schedule::accelerated(iterations, smoothed.lipschitz(l)?)?;
    let reg = smoothed.base();
    let phi = |x: &[f64]| oracle.objective(x) + reg.evaluate_slice(x);
    let mut hook = |_t: usize, g: &mut [f64], z: &mut [f64], eta: f64, y: &[f64]| {
        smoothed.add_gradient(y, g);
        for (zi, gi) in z.iter_mut().zip(g.iter()) {
            *zi -= gi / eta;
        }
        Ok(())
    };
    run_loop_with_y(oracle, &schedule, rng, trace_every, phi, &mut hook)
}

fn run_loop<O, Phi, Step>(
    oracle: &O,
    schedule: &Schedule,
    rng: &mut RngStream,
    trace_every: usize,
    phi: Phi,
    mut step: Step,
) -> Result<SolverOutput>
where
    O: StochasticOracle + ?Sized,
    Phi: Fn(&[f64]) -> f64,
    Step: FnMut(usize, &mut [f64], &mut [f64], f64) -> Result<()>,
{
    run_loop_with_y(oracle, schedule, rng, trace_every, phi, &mut |t, g, z, eta, _y| step(t, g, z, eta))
}

/// The shared loop. `step(t, g, z, eta, y)` must overwrite `z` with
/// `z_{t+1}` given the oracle draw `g` at `y_t`; it may modify `g`.
fn run_loop_with_y<O, Phi>(
    oracle: &O,
    schedule: &Schedule,
    rng: &mut RngStream,
    trace_every: usize,
    phi: Phi,
    step: &mut dyn FnMut(usize, &mut [f64], &mut [f64], f64, &[f64]) -> Result<()>,
) -> Result<SolverOutput>
where
    O: StochasticOracle + ?Sized,
    Phi: Fn(&[f64]) -> f64,
{
    if trace_every == 0 {
        return Err(Error::Parameter("trace_every must be >= 1".into()));
    }
    let n = schedule.iterations();
    let p = oracle.dim();
    let mut st = SolverState::new(p);
    let mut g = vec![0.0; p];
    let mut trace = Vec::with_capacity(n / trace_every + 3);

    let start = Instant::now();
    let mut paused = Duration::ZERO;
    let record = |iteration: usize, x: &[f64], paused: &mut Duration, trace: &mut Vec<TraceRecord>| -> Result<()> {
        let mark = Instant::now();
        let elapsed = mark.duration_since(start).saturating_sub(*paused);
        let objective = phi(x);
        if !objective.is_finite() {
            return Err(Error::AtIteration {
                iteration,
                source: Box::new(Error::NonFinite("objective")),
            });
        }
        trace.push(TraceRecord {
            iteration,
            elapsed_seconds: elapsed.as_secs_f64(),
            objective,
            gap: None,
        });
        *paused += mark.elapsed();
        Ok(())
    };

    record(0, &st.x, &mut paused, &mut trace)?;
    for t in 0..=n {
        st.t = t;
        let theta = schedule.theta(t);
        let eta = schedule.eta(t);
        for ((yi, xi), zi) in st.y.iter_mut().zip(&st.x).zip(&st.z) {
            *yi = (1.0 - theta) * xi + theta * zi;
        }
        oracle.sample_into(&st.y, rng, &mut g);
        step(t, &mut g, &mut st.z, eta, &st.y)?;
        let mut worst = 0.0f64;
        for (xi, zi) in st.x.iter_mut().zip(&st.z) {
            *xi = (1.0 - theta) * *xi + theta * zi;
            worst = worst.max(xi.abs()).max(zi.abs());
        }
        if !(worst <= DIVERGENCE_THRESHOLD) {
            return Err(Error::Divergence {
                iteration: t,
                threshold: DIVERGENCE_THRESHOLD,
            });
        }
        let next = t + 1;
        if next % trace_every == 0 || t == n {
            record(next, &st.x, &mut paused, &mut trace)?;
        }
    }
    let solve_seconds = start.elapsed().saturating_sub(paused).as_secs_f64();
    Ok(SolverOutput {
        x: DenseVector::from_vec(st.x).map_err(|_| Error::NonFinite("solver"))?,
        trace,
        solve_seconds,
    })
}

/// `(2D^2 + sigma^2)/sqrt(N+2) + L (4D^2 + 2 sigma^2)/(N+2)^2`, the
/// expected-gap bound for SG after `N` iterations.
pub fn theorem_bound(l: f64, sigma: f64, d: f64, iterations: usize) -> f64 {
    let n2 = iterations as f64 + 2.0;
    let (d2, s2) = (d * d, sigma * sigma);
    (2.0 * d2 + s2) / n2.sqrt() + l * (4.0 * d2 + 2.0 * s2) / (n2 * n2)
}

/// The SSG bound with `mu = ||A||/(N+2)`:
/// [`theorem_bound`] plus `||A||/(N+2) (M + (4D^2 + 2 sigma^2)/c)`.
pub fn theorem_bound_smoothed(l: f64, sigma: f64, d: f64, iterations: usize, a_norm: f64, m: f64, c: f64) -> f64 {
    let n2 = iterations as f64 + 2.0;
    let (d2, s2) = (d * d, sigma * sigma);
    theorem_bound(l, sigma, d, iterations) + a_norm / n2 * (m + (4.0 * d2 + 2.0 * s2) / c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{Exact, NoisyQuadratic};
    use crate::regularizers::{GroupStructure, Regularizer};

    fn v(values: &[f64]) -> DenseVector {
        DenseVector::from_vec(values.to_vec()).unwrap()
    }

    #[test]
    fn theta_sequence() {
        let s = Schedule::accelerated(4, 1.0).unwrap();
        let got: Vec<f64> = (0..5).map(|t| s.theta(t)).collect();
        let want = [1.0, 2.0 / 3.0, 0.5, 0.4, 1.0 / 3.0];
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn gamma_examples() {
        // N = 4, L = 1: N^{3/2} = 8, gamma_0 = 10
        let s = Schedule::accelerated(4, 1.0).unwrap();
        assert!((s.gamma(0) - 10.0).abs() < 1e-12);
        assert!((s.eta(0) - 10.0).abs() < 1e-12);
        let s = Schedule::accelerated(100, 2.0).unwrap();
        assert!((s.gamma(0) - 502.0).abs() < 1e-9);
        assert!((s.eta(0) - 1004.0).abs() < 1e-9);
        assert!(Schedule::accelerated(0, 1.0).is_err());
        assert!(Schedule::accelerated(5, 0.0).is_err());
    }

    #[test]
    fn schedule_inequalities_on_grid() {
        for &n in &[1usize, 10, 100, 10_000] {
            for &l in &[1e-3, 1.0, 1e3] {
                let s = Schedule::accelerated(n, l).unwrap();
                for t in 0..=n {
                    let (th, g) = (s.theta(t), s.gamma(t));
                    assert!(g > th, "n={n} l={l} t={t}");
                    let (th1, g1) = (s.theta(t + 1), s.gamma(t + 1));
                    assert!((1.0 - th1) / (th1 * g1) <= 1.0 / (th * g) + 1e-12, "n={n} l={l} t={t}");
                }
            }
        }
    }

    #[test]
    fn bound_values() {
        assert!((theorem_bound(1.0, 0.0, 1.0, 98) - 0.2004).abs() < 1e-12);
        assert!((theorem_bound(1.0, 0.5, 1.0, 98) - 0.22545).abs() < 1e-12);
        // 0.2004 + (1/100)(1/2 + 4)
        assert!((theorem_bound_smoothed(1.0, 0.0, 1.0, 98, 1.0, 0.5, 1.0) - 0.2454).abs() < 1e-12);
    }

    #[test]
    fn acsa_gamma_star() {
        let p = AcsaParams::derive(1.0, 10, 1.0, 1.0).unwrap();
        assert!((p.gamma_star - 880f64.sqrt()).abs() < 1e-12);
        let p = AcsaParams::derive(3.0, 10, 0.0, 1.0).unwrap();
        assert_eq!(p.gamma_star, 6.0);
        assert!(AcsaParams::derive(1.0, 10, 1.0, 0.0).is_err());
        let s = Schedule::acsa(10, 1.0, &AcsaParams::derive(1.0, 10, 0.0, 1.0).unwrap()).unwrap();
        assert!((s.eta(0) - 4.0).abs() < 1e-15);
        assert!((s.eta(3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pilot_estimates_injected_noise() {
        let q = NoisyQuadratic::new(v(&[1.0, 2.0, 3.0, 4.0]), 0.25).unwrap();
        let s = pilot_sigma_sq(&q, &mut RngStream::new(3), 20_000).unwrap();
        assert!((s - 0.25).abs() < 0.01, "{s}");
        assert_eq!(pilot_sigma_sq(&Exact(q), &mut RngStream::new(3), 30).unwrap(), 0.0);
    }

    #[test]
    fn unregularized_exact_quadratic_meets_bound() {
        // D = ||x* - x_0|| = 1, sigma = 0
        let q = Exact(NoisyQuadratic::new(v(&[0.6, -0.8]), 0.0).unwrap());
        let out = run_sg(&q, &Regularizer::zero(), 1.0, 98, &mut RngStream::new(0), 1).unwrap();
        assert!(out.final_objective() <= theorem_bound(1.0, 0.0, 1.0, 98));
        assert_eq!(out.trace.len(), 100);
        assert_eq!(out.trace.last().unwrap().iteration, 99);
    }

    #[test]
    fn trace_rows_and_determinism() {
        let q = NoisyQuadratic::new(v(&[1.0, -1.0, 0.5]), 0.1).unwrap();
        let reg = Regularizer::l1(0.1).unwrap();
        let a = run_sg(&q, &reg, 1.0, 25, &mut RngStream::new(7), 10).unwrap();
        let its: Vec<usize> = a.trace.iter().map(|r| r.iteration).collect();
        assert_eq!(its, vec![0, 10, 20, 26]);
        let b = run_sg(&q, &reg, 1.0, 25, &mut RngStream::new(7), 10).unwrap();
        assert_eq!(a.x, b.x);
        let objs = |o: &SolverOutput| o.trace.iter().map(|r| r.objective.to_bits()).collect::<Vec<_>>();
        assert_eq!(objs(&a), objs(&b));
        // tracing does not change the random stream
        let c = run_sg(&q, &reg, 1.0, 25, &mut RngStream::new(7), 1).unwrap();
        assert_eq!(a.x, c.x);
        assert!(run_sg(&q, &reg, 1.0, 25, &mut RngStream::new(7), 0).is_err());
    }

    #[test]
    fn ssg_equals_sg_without_regularizer() {
        let q = NoisyQuadratic::new(v(&[1.0, -2.0, 0.5, 0.0]), 0.3).unwrap();
        let smoothed = SmoothedRegularizer::with_schedule(Regularizer::zero(), 4, 200).unwrap();
        let a = run_sg(&q, &Regularizer::zero(), 1.0, 200, &mut RngStream::new(5), 50).unwrap();
        let b = run_ssg(&q, &smoothed, 1.0, 200, &mut RngStream::new(5), 50).unwrap();
        for (x, y) in a.x.iter().zip(b.x.iter()) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn exact_runs_decrease_after_warmup() {
        // Not a theorem: with N = 300 this instance overshoots near t = 277.
        let q = Exact(NoisyQuadratic::new(v(&[2.0, -1.0, 0.3]), 0.0).unwrap());
        for reg in [Regularizer::zero(), Regularizer::l1(0.5).unwrap()] {
            let out = run_sg(&q, &reg, 1.0, 200, &mut RngStream::new(0), 1).unwrap();
            for w in out.trace[3..].windows(2) {
                assert!(w[1].objective <= w[0].objective + 1e-9, "{:?} -> {:?}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn l1_solution_approached() {
        // x* = soft(a, lambda) for f = 1/2 ||x - a||^2
        let a = [2.0, -1.0, 0.3, 0.0];
        let q = Exact(NoisyQuadratic::new(v(&a), 0.0).unwrap());
        let reg = Regularizer::l1(0.5).unwrap();
        let out = run_sg(&q, &reg, 1.0, 2000, &mut RngStream::new(0), 2000).unwrap();
        let star = [1.5, -0.5, 0.0, 0.0];
        for (x, s) in out.x.iter().zip(&star) {
            assert!((x - s).abs() < 0.05, "{x} vs {s}");
        }
    }

    #[test]
    fn non_laminar_prox_failure_names_iteration() {
        let s = GroupStructure::new(3, vec![vec![0, 1], vec![1, 2]], vec![1.0, 1.0]).unwrap();
        let reg = Regularizer::group(0.5, s).unwrap();
        let q = Exact(NoisyQuadratic::new(v(&[1.0, 2.0, 3.0]), 0.0).unwrap());
        assert!(run_sg(&q, &reg, 1.0, 20, &mut RngStream::new(0), 5).is_ok());
    }

    #[test]
    fn divergence_is_reported() {
        let q = Exact(NoisyQuadratic::new(v(&[1e20, 0.0]), 0.0).unwrap());
        let err = run_sg(&q, &Regularizer::zero(), 1.0, 10, &mut RngStream::new(0), 1).unwrap_err();
        assert!(matches!(err, Error::Divergence { iteration: 0, .. }), "{err:?}");
    }

    #[test]
    fn acsa_converges_on_exact_quadratic() {
        let q = Exact(NoisyQuadratic::new(v(&[0.6, -0.8]), 0.0).unwrap());
        let params = AcsaParams::derive(1.0, 200, 0.0, 1.0).unwrap();
        let out = run_acsa(&q, &Regularizer::zero(), 1.0, 200, &params, &mut RngStream::new(0), 200).unwrap();
        assert!(out.final_objective() < 1e-3);
    }
}
