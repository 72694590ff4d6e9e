//! Stochastic gradient methods for composite convex objectives
//! `phi(x) = f(x) + h(x)`, where `f` is smooth and only reachable through an
//! unbiased stochastic gradient oracle and `h` is a non-smooth regularizer.
//!
//! The crate provides:
//!
//! - [`solvers`]: the accelerated stochastic gradient method with an exact
//!   proximal step (`run_sg`), its smoothed variant whose step is closed form
//!   (`run_ssg`), and the AC-SA baseline (`run_acsa`).
//! - [`regularizers`]: the l1 norm and weighted (possibly overlapping) group
//!   norms, their proximal mappings and the linear map `A` with
//!   `h(x) = max_{v in Q} v^T A x`.
//! - [`smoothing`]: Nesterov smoothing of such regularizers.
//! - [`problems`]: synthetic regression data sets and stochastic oracles.
//! - [`vector`], [`rng`], [`trace`]: shared plumbing.

pub mod error;
pub mod problems;
pub mod regularizers;
pub mod rng;
pub mod smoothing;
pub mod solvers;
pub mod trace;
pub mod vector;

pub use error::{Error, Result};
pub use problems::{Dataset, DatasetKind, LipschitzConvention, StochasticOracle};
pub use regularizers::{GroupStructure, LinearMapA, Penalty, Regularizer};
pub use rng::RngStream;
pub use smoothing::SmoothedRegularizer;
pub use solvers::{AcsaParams, Schedule, SolverOutput};
pub use trace::TraceRecord;
pub use vector::DenseVector;
