//! Experiment harness around the `composite-sgd` solvers: configuration
//! parsing, seed fan-out, trace and summary output.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;

pub use config::{ProblemKind, RegularizerKind, RunConfig, SolverKind};
pub use error::CliError;
