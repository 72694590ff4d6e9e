use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use composite_sgd_cli::commands;
use composite_sgd_cli::CliError;

#[derive(Parser)]
#[command(name = "composite-sgd", version, about = "Stochastic gradient experiments on composite objectives")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every solver and seed of a config; write traces and summary.json
    Run { config: PathBuf },
    /// Run all *.cfg files in a directory on one shared instance and merge the traces
    Compare {
        dir: PathBuf,
        /// Where to write comparison.csv and comparison.json (default: DIR)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the seed-mean final gap against the convergence bound
    VerifyBounds { config: PathBuf },
    /// Write the data set of a config as CSV
    GenData { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Run { config } => {
            let report = commands::run(&config)?;
            for (rec, s) in report.records.iter().zip(&report.summaries) {
                println!(
                    "{} seed {}: final objective {} ({:.3} s) -> {}",
                    rec.solver.name(),
                    rec.seed,
                    s.final_objective,
                    s.wall_clock_seconds,
                    s.trace_file.display()
                );
            }
            println!("summary: {}", report.summary_file.display());
        }
        Command::Compare { dir, out } => {
            let report = commands::compare(&dir, out.as_deref())?;
            println!("{:<24} {:>24} {:>12}", "run", "final objective", "seconds");
            for r in &report.rows {
                println!("{:<24} {:>24.16e} {:>12.3}", r.label, r.final_objective, r.wall_clock_seconds);
            }
            println!("merged traces: {}", report.merged_csv.display());
        }
        Command::VerifyBounds { config } => {
            let report = commands::verify_bounds(&config)?;
            for c in &report.checks {
                println!(
                    "{}: mean gap {:.6e} over {} seed(s), bound {:.6e}: {}{}",
                    c.solver,
                    c.mean_gap,
                    c.seeds,
                    c.bound,
                    if c.pass { "PASS" } else { "FAIL" },
                    if c.high_variance { " (high-variance check: single seed)" } else { "" }
                );
            }
            if !report.passed() {
                return Err(CliError::VerifyFailed);
            }
        }
        Command::GenData { config } => {
            let path = commands::gen_data(&config)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}
