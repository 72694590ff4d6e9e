//! The four subcommands.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use composite_sgd::trace::{attach_gap, format_f64, write_csv};
use serde::Serialize;
use serde_json::json;

use crate::config::{ProblemKind, RegularizerKind, RunConfig, SolverKind};
use crate::error::CliError;
use crate::experiment::{run_set, thread_pool, Instance, ProblemData, RunRecord};

/// Seeds used by `verify-bounds` when the config does not set `seeds`.
pub const DEFAULT_VERIFY_SEEDS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapReference {
    ClosedForm,
    EmpiricalBest,
}

impl GapReference {
    pub fn column(self) -> &'static str {
        match self {
            GapReference::ClosedForm => "gap",
            GapReference::EmpiricalBest => "gap_empirical_best",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub config: BTreeMap<String, String>,
    pub final_objective: f64,
    pub wall_clock_seconds: f64,
    pub sigma_sq_pilot: f64,
    pub theorem_bound: f64,
    pub theorem_bound_smoothed: f64,
    pub trace_file: PathBuf,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub records: Vec<RunRecord>,
    pub summaries: Vec<RunSummary>,
    pub gap_reference: GapReference,
    pub reference_objective: f64,
    pub summary_file: PathBuf,
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))
}

fn create_file(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path.display(), e))
}

/// `run <config>`: every listed solver for every seed, one trace CSV per
/// run plus `summary.json`.
pub fn run(config_path: &Path) -> Result<RunReport, CliError> {
    let config = RunConfig::load(config_path)?;
    run_config(&config)
}

pub fn run_config(config: &RunConfig) -> Result<RunReport, CliError> {
    let inst = Instance::build(config)?;
    let pool = thread_pool()?;
    let records = run_set(&inst, &config.seed_list(1), &pool)?;

    let (gap_reference, reference_objective) = match &inst.reference {
        Some(r) => (GapReference::ClosedForm, r.objective),
        None => {
            let best = records
                .iter()
                .flat_map(|r| r.output.trace.iter().map(|t| t.objective))
                .fold(f64::INFINITY, f64::min);
            (GapReference::EmpiricalBest, best)
        }
    };

    create_dir(&config.out)?;
    let mut summaries = Vec::with_capacity(records.len());
    for rec in &records {
        let path = config
            .out
            .join(format!("trace_{}_{}.csv", rec.solver.name(), rec.seed));
        let mut trace = rec.output.trace.clone();
        attach_gap(&mut trace, reference_objective);
        let mut w = create_file(&path)?;
        write_csv(&mut w, &trace, Some(gap_reference.column()))?;
        w.flush().map_err(|e| CliError::io(path.display(), e))?;

        let mut echo = config.raw.clone();
        echo.insert("solver".into(), rec.solver.name().into());
        echo.insert("seed".into(), rec.seed.to_string());
        summaries.push(RunSummary {
            config: echo,
            final_objective: rec.output.final_objective(),
            wall_clock_seconds: rec.wall_clock_seconds,
            sigma_sq_pilot: rec.sigma_sq_pilot,
            theorem_bound: rec.bounds.theorem_bound,
            theorem_bound_smoothed: rec.bounds.theorem_bound_smoothed,
            trace_file: path,
        });
    }

    let summary_file = config.out.join("summary.json");
    let doc = json!({
        "gap_reference": gap_reference,
        "reference_objective": reference_objective,
        "runs": summaries,
    });
    write_json(&summary_file, &doc)?;
    Ok(RunReport {
        records,
        summaries,
        gap_reference,
        reference_objective,
        summary_file,
    })
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut w = create_file(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::io(path.display(), e))?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path.display(), e))
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub label: String,
    pub config: PathBuf,
    pub solver: &'static str,
    pub seed: u64,
    pub final_objective: f64,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub merged_csv: PathBuf,
    pub table_json: PathBuf,
}

/// Fields that must agree for the compared runs to share one objective.
fn instance_fields(c: &RunConfig) -> Vec<(&'static str, String)> {
    vec![
        ("problem", c.problem.name().to_string()),
        ("regularizer", c.regularizer.name().to_string()),
        ("K", format!("{:?}", c.k)),
        ("p", c.p.to_string()),
        ("lambda", c.lambda.to_string()),
        ("data_seed", c.data_seed.to_string()),
        ("data_file", format!("{:?}", c.data_file)),
        ("groups_file", format!("{:?}", c.groups_file)),
        ("center", format!("{:?}", c.center)),
        ("center_norm", c.center_norm.to_string()),
    ]
}

/// `compare <dir>`: runs every `*.cfg` in `dir` (sorted by name) and merges
/// the first-seed traces into one CSV aligned on iteration.
pub fn compare(dir: &Path, out: Option<&Path>) -> Result<ComparisonReport, CliError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir.display(), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cfg") && p.is_file())
        .collect();
    paths.sort();
    if paths.len() < 2 {
        return Err(CliError::Config(format!(
            "compare needs at least two .cfg files in {}, found {}",
            dir.display(),
            paths.len()
        )));
    }
    let configs: Vec<RunConfig> = paths.iter().map(|p| RunConfig::load(p)).collect::<Result<_, _>>()?;
    let first = instance_fields(&configs[0]);
    for (path, c) in paths.iter().zip(&configs).skip(1) {
        for ((name, a), (_, b)) in first.iter().zip(instance_fields(c)) {
            if *a != b {
                return Err(CliError::Config(format!(
                    "field `{name}` differs: {} has {a}, {} has {b}",
                    paths[0].display(),
                    path.display()
                )));
            }
        }
    }

    let mut runs: Vec<(String, PathBuf, RunRecord)> = Vec::new();
    for (path, c) in paths.iter().zip(&configs) {
        let report = run_config(c)?;
        let stem = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        for rec in report.records.into_iter().filter(|r| r.seed == c.seed) {
            runs.push((stem.clone(), path.clone(), rec));
        }
    }
    let mut counts: BTreeMap<&'static str, usize> = BTreeMap::new();
    for (_, _, r) in &runs {
        *counts.entry(r.solver.name()).or_default() += 1;
    }
    let labels: Vec<String> = runs
        .iter()
        .map(|(stem, _, r)| {
            if counts[r.solver.name()] > 1 {
                format!("{stem}_{}", r.solver.name())
            } else {
                r.solver.name().to_string()
            }
        })
        .collect();

    let out_dir = out.unwrap_or(dir);
    create_dir(out_dir)?;
    let merged_csv = out_dir.join("comparison.csv");
    write_merged(&merged_csv, &labels, &runs)?;

    let rows: Vec<ComparisonRow> = runs
        .iter()
        .zip(&labels)
        .map(|((_, path, r), label)| ComparisonRow {
            label: label.clone(),
            config: path.clone(),
            solver: r.solver.name(),
            seed: r.seed,
            final_objective: r.output.final_objective(),
            wall_clock_seconds: r.wall_clock_seconds,
        })
        .collect();
    let table_json = out_dir.join("comparison.json");
    write_json(&table_json, &json!({ "runs": rows }))?;
    Ok(ComparisonReport {
        rows,
        merged_csv,
        table_json,
    })
}

fn write_merged(path: &Path, labels: &[String], runs: &[(String, PathBuf, RunRecord)]) -> Result<(), CliError> {
    let mut table: BTreeMap<usize, Vec<Option<f64>>> = BTreeMap::new();
    for (j, (_, _, r)) in runs.iter().enumerate() {
        for t in &r.output.trace {
            table.entry(t.iteration).or_insert_with(|| vec![None; runs.len()])[j] = Some(t.objective);
        }
    }
    let file = create_file(path)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    let csv_err = |e: csv::Error| CliError::io(path.display(), e);
    let mut header = vec!["iteration".to_string()];
    header.extend(labels.iter().map(|l| format!("objective_{l}")));
    w.write_record(&header).map_err(csv_err)?;
    for (it, values) in &table {
        let mut rec = vec![it.to_string()];
        rec.extend(values.iter().map(|v| v.map(format_f64).unwrap_or_default()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io(path.display(), e))
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub solver: &'static str,
    pub seeds: usize,
    pub mean_gap: f64,
    pub bound: f64,
    pub pass: bool,
    pub high_variance: bool,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<BoundCheck>,
    pub report_file: PathBuf,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// `verify-bounds <config>`: seed-mean final gap against the SG or SSG
/// bound. Needs a closed-form optimum and a known noise level, i.e. the
/// quadratic problem with an l1 penalty or none.
pub fn verify_bounds(config_path: &Path) -> Result<VerifyReport, CliError> {
    let mut config = RunConfig::load(config_path)?;
    let closed_form = config.problem == ProblemKind::Quadratic
        && matches!(config.regularizer, RegularizerKind::L1 | RegularizerKind::None);
    if !closed_form {
        return Err(CliError::Config(format!(
            "verify-bounds needs a closed-form optimum and known noise: problem = quadratic with regularizer l1 or none (got {} with {})",
            config.problem.name(),
            config.regularizer.name()
        )));
    }
    if config.solvers.contains(&SolverKind::Acsa) {
        return Err(CliError::Config("field `solver`: verify-bounds covers sg and ssg only".into()));
    }
    if config.mu.is_some() && config.solvers.contains(&SolverKind::Ssg) {
        return Err(CliError::Config("field `mu`: the smoothed bound assumes the default mu = ||A||/(N+2)".into()));
    }
    config.seeds = Some(config.seeds.unwrap_or(DEFAULT_VERIFY_SEEDS));
    let seeds = config.seeds.unwrap_or(DEFAULT_VERIFY_SEEDS);
    let report = run_config(&config)?;

    let mut checks = Vec::new();
    for &solver in &config.solvers {
        let recs: Vec<&RunRecord> = report.records.iter().filter(|r| r.solver == solver).collect();
        let mean_gap = recs
            .iter()
            .map(|r| r.output.final_objective() - report.reference_objective)
            .sum::<f64>()
            / recs.len() as f64;
        let b = recs[0].bounds;
        let bound = match solver {
            SolverKind::Ssg => b.theorem_bound_smoothed,
            _ => b.theorem_bound,
        };
        checks.push(BoundCheck {
            solver: solver.name(),
            seeds,
            mean_gap,
            bound,
            pass: mean_gap <= bound,
            high_variance: seeds == 1,
        });
    }
    let report_file = config.out.join("verify.json");
    write_json(&report_file, &json!({ "checks": checks }))?;
    Ok(VerifyReport { checks, report_file })
}

/// `gen-data <config>`: writes the data set of a linear-discrete or
/// logistic config to `data_file`, or `<out>/data.csv` when unset.
pub fn gen_data(config_path: &Path) -> Result<PathBuf, CliError> {
    let mut config = RunConfig::load(config_path)?;
    if !config.problem.has_dataset() {
        return Err(CliError::Config(format!(
            "field `problem`: {} has no finite data set to write",
            config.problem.name()
        )));
    }
    let target = config
        .data_file
        .take()
        .unwrap_or_else(|| config.out.join("data.csv"));
    let inst = Instance::build(&config)?;
    let data = match &inst.data {
        ProblemData::Discrete(d) | ProblemData::Logistic(d) => d,
        _ => unreachable!("checked above"),
    };
    if let Some(parent) = target.parent() {
        create_dir(parent)?;
    }
    let mut w = create_file(&target)?;
    data.write_csv(&mut w)?;
    w.flush().map_err(|e| CliError::io(target.display(), e))?;
    Ok(target)
}
