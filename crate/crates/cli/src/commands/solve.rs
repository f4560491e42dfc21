//! `solve`: run one configured solver and write its trace.

use std::path::PathBuf;

use clap::Args;

use ircg::config::validate;
use ircg::solvers::Runner;

use crate::config_file::{resolve_out_path, ReferenceFile, RunConfig};
use crate::{trace_io, CliError};

#[derive(Args)]
pub struct SolveArgs {
    /// Run-configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Override the solver seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the trace output path.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Override the iteration budget.
    #[arg(long)]
    pub max_iters: Option<u64>,
    /// Override the oracle-call budget.
    #[arg(long)]
    pub max_oracle_calls: Option<u64>,
    /// Override the checkpoint stride.
    #[arg(long)]
    pub checkpoint_every: Option<u64>,
    /// Override the reference file used for gap columns.
    #[arg(long)]
    pub refs: Option<PathBuf>,
    /// Print the effective configuration and exit without solving.
    #[arg(long)]
    pub print_config: bool,
}

pub fn run(args: SolveArgs) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(&args.config)?;
    // command-line overrides beat file values
    if let Some(seed) = args.seed {
        cfg.solver.seed = seed;
    }
    if let Some(trace) = &args.trace {
        cfg.output.trace = Some(trace.clone());
    }
    if let Some(mi) = args.max_iters {
        cfg.solver.max_iters = Some(mi);
    }
    if let Some(mo) = args.max_oracle_calls {
        cfg.solver.max_oracle_calls = Some(mo);
    }
    if let Some(ce) = args.checkpoint_every {
        cfg.output.checkpoint_every = ce;
    }
    if let Some(refs) = &args.refs {
        cfg.reference.file = Some(refs.clone());
    }

    if args.print_config {
        print!("{}", cfg.to_toml());
        return Ok(());
    }

    let mut problem = cfg.build_problem()?;
    if let Some(ref_path) = &cfg.reference.file {
        let file = ReferenceFile::load(ref_path)?;
        problem.set_refs(file.to_refs());
    }
    let solver_config = cfg.build_solver_config()?;
    let validated = validate(&problem, &solver_config).map_err(CliError::from_core)?;
    let budget = validated.budget;
    let mut runner = Runner::new(&problem, validated).map_err(CliError::from_core)?;
    let trace = runner.run(&budget).map_err(CliError::from_core)?;

    let trace_path = resolve_out_path(
        &cfg.output
            .trace
            .clone()
            .unwrap_or_else(|| PathBuf::from("trace.csv")),
    );
    trace_io::write(&trace_path, &trace)?;

    let last = trace.last();
    println!(
        "wrote {} ({} rows; t={}, oracle_calls={}{}{})",
        trace_path.display(),
        trace.len(),
        runner.state().t,
        runner.state().oracle_calls,
        last.and_then(|r| r.g_gap_z.or(r.g_gap_x))
            .map(|g| format!(", g_gap={g:.6e}"))
            .unwrap_or_default(),
        last.and_then(|r| r.f_gap_z.or(r.f_gap_x))
            .map(|f| format!(", f_gap={f:.6e}"))
            .unwrap_or_default(),
    );
    Ok(())
}
