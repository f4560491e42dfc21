//! `bench`: run a suite of solver configurations with replications and write
//! a one-row-per-entry summary.
//!
//! Replications fan out across threads, each run owning its state; results
//! merge in entry order regardless of completion order. Replication `r` of
//! every entry uses seed `suite.seed + r`, so re-running a suite reproduces
//! the means exactly — unless an entry uses a wall-clock budget, which the
//! summary flags as non-reproducible.

use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;

use ircg::config::{validate, Budget, SolverConfig};
use ircg::solvers::Runner;
use ircg::TraceRecord;

use crate::config_file::{
    resolve_out_path, ProblemSection, ReferenceFile, ReferenceSection, RunConfig, SolverSection,
};
use crate::CliError;

#[derive(Args)]
pub struct BenchArgs {
    /// Suite configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Summary CSV output path.
    #[arg(long, default_value = "bench_summary.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuiteConfig {
    suite: SuiteSection,
    problem: ProblemSection,
    #[serde(default)]
    reference: ReferenceSection,
    #[serde(rename = "entry")]
    entries: Vec<SolverSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuiteSection {
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_reps")]
    reps: u64,
    #[serde(default = "default_checkpoint")]
    checkpoint_every: u64,
    #[serde(default)]
    name: Option<String>,
}

fn default_reps() -> u64 {
    1
}

fn default_checkpoint() -> u64 {
    100
}

#[derive(Debug, Clone)]
struct RepOutcome {
    iters: u64,
    oracle_calls: u64,
    wall_ms: f64,
    f_gap: Option<f64>,
    g_gap: Option<f64>,
    error: Option<String>,
}

pub fn run(args: BenchArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", args.config.display())))?;
    let suite: SuiteConfig = toml::from_str(&text)
        .map_err(|e| CliError::config(format!("bad suite {}: {e}", args.config.display())))?;
    if suite.entries.is_empty() {
        return Err(CliError::config("suite has no entries".into()));
    }

    // one shared immutable problem; runs only read it
    let base = RunConfig {
        problem: suite.problem.clone(),
        solver: suite.entries[0].clone(),
        output: Default::default(),
        reference: suite.reference.clone(),
    };
    let mut problem = base.build_problem()?;
    if let Some(ref_path) = &suite.reference.file {
        problem.set_refs(ReferenceFile::load(ref_path)?.to_refs());
    }

    // validate every entry up front so config errors fail the whole suite
    let mut configs: Vec<SolverConfig> = Vec::new();
    for entry in &suite.entries {
        let rc = RunConfig {
            problem: suite.problem.clone(),
            solver: entry.clone(),
            output: Default::default(),
            reference: suite.reference.clone(),
        };
        let mut sc = rc.build_solver_config()?;
        sc.checkpoint_every = suite.checkpoint_every;
        validate(&problem, &sc).map_err(CliError::from_core)?;
        configs.push(sc);
    }

    let reps = suite.reps.max(1);
    let mut outcomes: Vec<Vec<RepOutcome>> = Vec::with_capacity(configs.len());
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for config in &configs {
            let mut entry_handles = Vec::new();
            for rep in 0..reps {
                let problem = &problem;
                let mut config = config.clone();
                config.seed = suite.seed + rep;
                entry_handles.push(scope.spawn(move || run_one(problem, config)));
            }
            handles.push(entry_handles);
        }
        for entry_handles in handles {
            let mut per_entry = Vec::with_capacity(reps as usize);
            for h in entry_handles {
                per_entry.push(h.join().expect("worker panicked"));
            }
            outcomes.push(per_entry);
        }
    });

    let out = resolve_out_path(&args.out);
    let mut csv = String::from(
        "name,method,reps,failures,mean_iterations,mean_oracle_calls,mean_final_f_gap,mean_final_g_gap,mean_wall_ms,reproducible,errors\n",
    );
    for (i, (entry, reps_out)) in suite.entries.iter().zip(&outcomes).enumerate() {
        let name = entry
            .name_or_index(i)
            .unwrap_or_else(|| format!("entry{i}"));
        let ok: Vec<&RepOutcome> = reps_out.iter().filter(|o| o.error.is_none()).collect();
        let failures = reps_out.len() - ok.len();
        let mean = |f: &dyn Fn(&RepOutcome) -> f64| -> String {
            if ok.is_empty() {
                String::new()
            } else {
                format!("{}", ok.iter().map(|o| f(o)).sum::<f64>() / ok.len() as f64)
            }
        };
        let mean_opt = |f: &dyn Fn(&RepOutcome) -> Option<f64>| -> String {
            let vals: Vec<f64> = ok.iter().filter_map(|o| f(o)).collect();
            if vals.is_empty() {
                String::new()
            } else {
                format!("{}", vals.iter().sum::<f64>() / vals.len() as f64)
            }
        };
        let reproducible = entry.max_wall_ms.is_none();
        let errors = reps_out
            .iter()
            .filter_map(|o| o.error.clone())
            .collect::<Vec<_>>()
            .join("; ");
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            csv_quote(&name),
            entry.method,
            reps_out.len(),
            failures,
            mean(&|o| o.iters as f64),
            mean(&|o| o.oracle_calls as f64),
            mean_opt(&|o| o.f_gap),
            mean_opt(&|o| o.g_gap),
            mean(&|o| o.wall_ms),
            reproducible,
            csv_quote(&errors),
        ));
    }
    std::fs::write(&out, csv)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", out.display())))?;
    println!(
        "wrote {} ({} entries x {} reps{})",
        out.display(),
        suite.entries.len(),
        reps,
        suite
            .suite_name()
            .map(|n| format!(", suite {n}"))
            .unwrap_or_default()
    );
    Ok(())
}

impl SuiteConfig {
    fn suite_name(&self) -> Option<&str> {
        self.suite.name.as_deref()
    }
}

impl SolverSection {
    fn name_or_index(&self, _i: usize) -> Option<String> {
        self.name.clone()
    }
}

fn run_one(problem: &ircg::ProblemInstance, config: SolverConfig) -> RepOutcome {
    let budget = config.budget;
    let attempt = || -> Result<RepOutcome, ircg::Error> {
        let validated = validate(problem, &config)?;
        let mut runner = Runner::new(problem, validated)?;
        let trace = runner.run(&budget)?;
        let last: Option<&TraceRecord> = trace.last();
        Ok(RepOutcome {
            iters: runner.state().t as u64,
            oracle_calls: runner.state().oracle_calls,
            wall_ms: last.map(|r| r.wall_ms).unwrap_or(0.0),
            f_gap: last.and_then(|r| r.f_gap_z.or(r.f_gap_x)),
            g_gap: last.and_then(|r| r.g_gap_z.or(r.g_gap_x)),
            error: None,
        })
    };
    attempt().unwrap_or_else(|e| RepOutcome {
        iters: 0,
        oracle_calls: 0,
        wall_ms: 0.0,
        f_gap: None,
        g_gap: None,
        error: Some(e.to_string()),
    })
}

/// RFC-4180 quoting: wrap when the field contains a comma, quote, or
/// newline; double any inner quotes.
fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
