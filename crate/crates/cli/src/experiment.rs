//! Turning a [`RunConfig`] into problem instances and solver runs.

use std::time::Instant;

use composite_sgd::problems::{
    gen_linear_dataset, gen_logistic_dataset, ground_truth_linear, lipschitz_linear, ContinuousLinear,
    MinibatchLinear, MinibatchLogistic, NoisyQuadratic,
};
use composite_sgd::regularizers::soft_threshold;
use composite_sgd::rng::sample_gaussian;
use composite_sgd::solvers::{pilot_sigma_sq, run_acsa, run_sg, run_ssg, theorem_bound, theorem_bound_smoothed, PILOT_DRAWS};
use composite_sgd::{
    AcsaParams, Dataset, DatasetKind, DenseVector, GroupStructure, Penalty, Regularizer, RngStream, SmoothedRegularizer,
    SolverOutput, StochasticOracle,
};
use rayon::prelude::*;

use crate::config::{ProblemKind, RegularizerKind, RunConfig, SolverKind};
use crate::error::CliError;

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "COMPOSITE_SGD_THREADS";

const DATA_STREAM: u64 = 0;
const SOLVER_STREAM: u64 = 1;
const PILOT_STREAM: u64 = 2;

#[derive(Debug, Clone)]
pub enum ProblemData {
    Discrete(Dataset),
    Logistic(Dataset),
    Continuous(ContinuousLinear),
    Quadratic(NoisyQuadratic),
}

/// Closed-form minimizer of the composite objective.
#[derive(Debug, Clone)]
pub struct Reference {
    pub x: DenseVector,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub config: RunConfig,
    pub data: ProblemData,
    pub reg: Regularizer,
    /// Lipschitz constant of `grad f` used by every solver.
    pub lipschitz: f64,
    pub reference: Option<Reference>,
}

impl Instance {
    pub fn build(config: &RunConfig) -> Result<Self, CliError> {
        let data = build_data(config)?;
        let reg = build_regularizer(config)?;
        let lipschitz = match (&data, config.lipschitz) {
            (_, Some(l)) => l,
            (ProblemData::Discrete(d), None) => lipschitz_linear(d, config.lipschitz_convention)?,
            // Hessian is I for both; logistic follows the unit bound on ||x_i||.
            _ => 1.0,
        };
        let mut inst = Instance {
            config: config.clone(),
            data,
            reg,
            lipschitz,
            reference: None,
        };
        inst.reference = inst.closed_form();
        Ok(inst)
    }

    pub fn dim(&self) -> usize {
        self.config.p
    }

    /// Calls `f` with the stochastic oracle of this instance.
    pub fn with_oracle<R>(&self, f: impl FnOnce(&dyn StochasticOracle) -> R) -> Result<R, CliError> {
        let batch = self.config.batch_size;
        Ok(match &self.data {
            ProblemData::Discrete(d) => f(&MinibatchLinear::new(d, batch)?),
            ProblemData::Logistic(d) => f(&MinibatchLogistic::new(d, batch)?),
            ProblemData::Continuous(o) => f(o),
            ProblemData::Quadratic(o) => f(o),
        })
    }

    /// Exact `phi(x) = f(x) + h(x)`.
    pub fn objective(&self, x: &DenseVector) -> Result<f64, CliError> {
        let f = self.with_oracle(|o| o.objective(x.as_slice()))?;
        Ok(f + self.reg.evaluate(x)?)
    }

    pub fn smoothed(&self) -> Result<SmoothedRegularizer, CliError> {
        let p = self.dim();
        Ok(match self.config.mu {
            Some(mu) => SmoothedRegularizer::new(self.reg.clone(), p, mu)?,
            None => SmoothedRegularizer::with_schedule(self.reg.clone(), p, self.config.iterations)?,
        })
    }

    /// `x* = soft(a, lambda)` when `f = 1/2 ||x - a||^2 + const` and `h` is
    /// l1 (or absent).
    fn closed_form(&self) -> Option<Reference> {
        let a = match &self.data {
            ProblemData::Quadratic(q) => q.center().clone(),
            ProblemData::Continuous(c) => c.beta_hat().clone(),
            _ => return None,
        };
        let mut x = a.into_vec();
        match self.reg.penalty() {
            _ if self.reg.lambda() == 0.0 => {}
            Penalty::L1 => soft_threshold(&mut x, self.reg.lambda()),
            Penalty::Group(_) => return None,
        }
        let x = DenseVector::from_vec(x).ok()?;
        let objective = self.objective(&x).ok()?;
        Some(Reference { x, objective })
    }
}

fn build_data(c: &RunConfig) -> Result<ProblemData, CliError> {
    let mut rng = RngStream::substream(c.data_seed, DATA_STREAM);
    let load = |kind: DatasetKind| -> Result<Option<Dataset>, CliError> {
        let Some(path) = &c.data_file else { return Ok(None) };
        let file = std::fs::File::open(path).map_err(|e| CliError::io(path.display(), e))?;
        let d = Dataset::read_csv(std::io::BufReader::new(file), kind)
            .map_err(|e| CliError::Config(format!("field `data_file`: {}: {e}", path.display())))?;
        if d.p() != c.p {
            return Err(CliError::Config(format!("field `p`: data file has p = {}, config says {}", d.p(), c.p)));
        }
        if let Some(k) = c.k {
            if d.k() != k {
                return Err(CliError::Config(format!("field `K`: data file has K = {}, config says {k}", d.k())));
            }
        }
        Ok(Some(d))
    };
    Ok(match c.problem {
        ProblemKind::LinearDiscrete => ProblemData::Discrete(match load(DatasetKind::Linear)? {
            Some(d) => d,
            None => gen_linear_dataset(c.k.unwrap_or(0), c.p, &mut rng)?,
        }),
        ProblemKind::Logistic => ProblemData::Logistic(match load(DatasetKind::Logistic)? {
            Some(d) => d,
            None => gen_logistic_dataset(c.k.unwrap_or(0), c.p, &mut rng)?,
        }),
        ProblemKind::LinearContinuous => {
            ProblemData::Continuous(ContinuousLinear::new(ground_truth_linear(c.p)?, c.batch_size)?)
        }
        ProblemKind::Quadratic => {
            let center = match &c.center {
                Some(v) => DenseVector::from_vec(v.clone())?,
                None => {
                    let g = sample_gaussian(&mut rng, c.p);
                    let n = g.norm2();
                    DenseVector::from_vec(g.iter().map(|v| v * c.center_norm / n).collect())?
                }
            };
            ProblemData::Quadratic(NoisyQuadratic::new(center, c.noise_sigma_sq)?)
        }
    })
}

fn build_regularizer(c: &RunConfig) -> Result<Regularizer, CliError> {
    Ok(match c.regularizer {
        RegularizerKind::None => Regularizer::zero(),
        RegularizerKind::L1 => Regularizer::l1(c.lambda)?,
        RegularizerKind::Hierarchical => {
            let n = c.p.trailing_zeros();
            Regularizer::group(c.lambda, GroupStructure::hierarchical(n)?)?
        }
        RegularizerKind::Groups => {
            let path = c.groups_file.as_ref().expect("validated by the config parser");
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
            let s = GroupStructure::parse(&text, c.p)
                .map_err(|e| CliError::Config(format!("field `groups_file`: {}: {e}", path.display())))?;
            Regularizer::group(c.lambda, s)?
        }
    })
}

/// Inputs and values of both convergence bounds for one run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Bounds {
    #[serde(rename = "D")]
    pub d: f64,
    pub sigma_sq: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub a_norm: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub c: f64,
    pub theorem_bound: f64,
    pub theorem_bound_smoothed: f64,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub solver: SolverKind,
    pub seed: u64,
    pub output: SolverOutput,
    pub wall_clock_seconds: f64,
    pub sigma_sq_pilot: f64,
    pub acsa: Option<AcsaParams>,
    pub mu: Option<f64>,
    pub bounds: Bounds,
}

/// Runs one solver for one seed. The solver draws from substream 1 of
/// `seed` and the variance pilot from substream 2, so every solver sees the
/// same oracle draws for a given seed.
pub fn run_one(inst: &Instance, solver: SolverKind, seed: u64) -> Result<RunRecord, CliError> {
    let c = &inst.config;
    let start = Instant::now();
    let wrap = |e: composite_sgd::Error| CliError::Solver {
        solver: solver.name(),
        seed,
        source: e,
    };
    let mut rng = RngStream::substream(seed, SOLVER_STREAM);
    let mut pilot_rng = RngStream::substream(seed, PILOT_STREAM);
    let smoothed = inst.smoothed()?;
    let (output, sigma_sq_pilot, acsa, mu) = inst.with_oracle(|o| -> Result<_, CliError> {
        let sigma_sq_pilot = pilot_sigma_sq(o, &mut pilot_rng, PILOT_DRAWS)?;
        Ok(match solver {
            SolverKind::Sg => {
                let out = run_sg(o, &inst.reg, inst.lipschitz, c.iterations, &mut rng, c.trace_every).map_err(wrap)?;
                (out, sigma_sq_pilot, None, None)
            }
            SolverKind::Ssg => {
                let out = run_ssg(o, &smoothed, inst.lipschitz, c.iterations, &mut rng, c.trace_every).map_err(wrap)?;
                (out, sigma_sq_pilot, None, Some(smoothed.mu()))
            }
            SolverKind::Acsa => {
                let sigma_sq = c.acsa_sigma_sq.unwrap_or(sigma_sq_pilot);
                let params = AcsaParams::derive(inst.lipschitz, c.iterations, sigma_sq, c.acsa_d)?;
                let out = run_acsa(o, &inst.reg, inst.lipschitz, c.iterations, &params, &mut rng, c.trace_every)
                    .map_err(wrap)?;
                (out, sigma_sq_pilot, Some(params), None)
            }
        })
    })??;
    let bounds = bounds(inst, &smoothed, sigma_sq_pilot);
    Ok(RunRecord {
        solver,
        seed,
        output,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        sigma_sq_pilot,
        acsa,
        mu,
        bounds,
    })
}

/// `D` is `||x*||` when a closed form exists and `acsa_D` otherwise; `sigma^2`
/// is the injected noise for the quadratic problem and the pilot estimate
/// (or `acsa_sigma_sq`) otherwise.
fn bounds(inst: &Instance, smoothed: &SmoothedRegularizer, sigma_sq_pilot: f64) -> Bounds {
    let c = &inst.config;
    let d = match &inst.reference {
        Some(r) => r.x.norm2(),
        None => c.acsa_d,
    };
    let sigma_sq = match &inst.data {
        ProblemData::Quadratic(q) => q.noise_sigma_sq(),
        _ => c.acsa_sigma_sq.unwrap_or(sigma_sq_pilot),
    };
    let sigma = sigma_sq.sqrt();
    let (a_norm, m, cc) = (smoothed.a_norm(), smoothed.m(), smoothed.c());
    Bounds {
        d,
        sigma_sq,
        l: inst.lipschitz,
        n: c.iterations,
        a_norm,
        m,
        c: cc,
        theorem_bound: theorem_bound(inst.lipschitz, sigma, d, c.iterations),
        theorem_bound_smoothed: theorem_bound_smoothed(inst.lipschitz, sigma, d, c.iterations, a_norm, m, cc),
    }
}

/// Worker pool sized by [`THREADS_ENV`] (default: all logical CPUs).
pub fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))
}

/// Every (solver, seed) pair of the config, run concurrently and returned
/// in (solver, seed) order.
pub fn run_set(inst: &Instance, seeds: &[u64], pool: &rayon::ThreadPool) -> Result<Vec<RunRecord>, CliError> {
    let jobs: Vec<(SolverKind, u64)> = inst
        .config
        .solvers
        .iter()
        .flat_map(|&s| seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    pool.install(|| jobs.par_iter().map(|&(s, seed)| run_one(inst, s, seed)).collect())
}
