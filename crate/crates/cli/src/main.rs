//! Benchmark CLI for the bilevel conditional-gradient solvers: generate data,
//! certify references, run solvers to traces, fit convergence rates, and run
//! benchmark suites.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numerical
//! failure (non-finite iterate).

mod commands;
mod config_file;
mod trace_io;

use clap::{Parser, Subcommand};

/// Error carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub msg: String,
    pub code: i32,
}

impl CliError {
    pub fn config(msg: String) -> Self {
        Self { msg, code: 2 }
    }

    pub fn from_core(e: ircg::Error) -> Self {
        let code = match e {
            ircg::Error::NumericalFailure { .. } => 3,
            _ => 2,
        };
        Self {
            msg: e.to_string(),
            code,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.msg)
    }
}

#[derive(Parser)]
#[command(
    name = "ircg",
    version,
    about = "Projection-free stochastic bilevel solver benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write deterministic synthetic data files for a named generator.
    Gen(commands::gen::GenArgs),
    /// Certify the inner optimal value and estimate the bilevel value.
    Reference(commands::reference::ReferenceArgs),
    /// Run a configured solver and write its trace CSV.
    Solve(commands::solve::SolveArgs),
    /// Fit a power-law convergence rate on a trace field.
    Rates(commands::rates::RatesArgs),
    /// Run a suite of solver configurations with replications.
    Bench(commands::bench::BenchArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Gen(args) => commands::gen::run(args),
        Cmd::Reference(args) => commands::reference::run(args),
        Cmd::Solve(args) => commands::solve::run(args),
        Cmd::Rates(args) => commands::rates::run(args),
        Cmd::Bench(args) => commands::bench::run(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.code);
    }
}
