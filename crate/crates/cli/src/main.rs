//! `tropical-torus`: triangulations, convexity certificates, Tate iteration
//! and equidistribution experiments from JSON problem files.
//!
//! Exit codes: 0 pass, 2 parse error, 3 invariant violation, 4 ε-search
//! exhausted, 5 verdict fail.

mod commands;
mod problem;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{CliError, Outcome, Overrides};
use problem::{EpsilonChoice, Problem};

#[derive(Parser)]
#[command(name = "tropical-torus", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Problem file (JSON).
    #[arg(long, global = true)]
    problem: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Refinement level (triangulate, equidist) or witness level (obstruction).
    #[arg(long, global = true)]
    level: Option<u32>,
    /// `auto` or a rational `p/q`.
    #[arg(long, global = true)]
    epsilon: Option<EpsilonChoice>,
    /// Number of Tate iterations
    #[arg(long, global = true)]
    iterations: Option<u32>,
    /// Seed for random test functions and sampling
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo sample count (collapse)
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Write the periodic triangulation at the requested level.
    Triangulate,
    /// Certify strong convexity of the perturbed model function.
    Certify,
    /// Tabulate sup distances of Tate iterates to the quadratic form.
    Tate,
    /// Grid discrepancies against Haar measure.
    Equidist,
    /// Push product Haar measure through the difference map.
    Collapse,
    /// Lower bound on discrepancy for measures on a fixed-denominator grid.
    Obstruction,
}

#[derive(ValueEnum, Clone, Copy)]
enum Format {
    Json,
    Csv,
}

fn render(outcome: &Outcome, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => tropical_torus::json::to_canonical_string(&outcome.report)
            .map(String::into_bytes)
            .map_err(|e| CliError::Invariant(e.to_string())),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Invariant(e.to_string());
            w.write_record(&outcome.header).map_err(io)?;
            for row in &outcome.rows {
                w.write_record(row).map_err(io)?;
            }
            w.into_inner().map_err(|e| CliError::Invariant(e.to_string()))
        }
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let path = cli.problem.as_ref().ok_or_else(|| CliError::Parse("--problem is required".into()))?;
    let problem = Problem::load(path)?;
    let overrides = Overrides {
        level: cli.level,
        epsilon: cli.epsilon.clone(),
        iterations: cli.iterations,
        seed: cli.seed,
        samples: cli.samples,
    };
    let outcome = match cli.command {
        Command::Triangulate => commands::triangulate(&problem, &overrides)?,
        Command::Certify => commands::certify(&problem, &overrides)?,
        Command::Tate => commands::tate(&problem, &overrides)?,
        Command::Equidist => commands::equidist(&problem, &overrides)?,
        Command::Collapse => commands::collapse(&problem, &overrides)?,
        Command::Obstruction => commands::obstruction(&problem, &overrides)?,
    };
    let bytes = render(&outcome, cli.format)?;
    let written = match &cli.out {
        Some(p) => std::fs::write(p, &bytes),
        None => std::io::stdout().lock().write_all(&bytes),
    };
    written.map_err(|e| CliError::Invariant(format!("cannot write output: {e}")))?;
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(&cli);
    eprintln!("elapsed {:.3}s", start.elapsed().as_secs_f64());
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verdict: fail");
            ExitCode::from(5)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
