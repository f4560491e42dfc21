//! `rates`: least-squares power-law fit on a trace field.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use ircg::diagnostics::{fit_rate_slope, GapField};

use crate::{trace_io, CliError};

#[derive(Args)]
pub struct RatesArgs {
    /// Trace CSV produced by `solve`.
    #[arg(long)]
    pub trace: PathBuf,
    /// Field to fit: f_gap_x, g_gap_x, f_gap_z, or g_gap_z.
    #[arg(long)]
    pub field: String,
    /// Window start (iteration index, inclusive).
    #[arg(long)]
    pub t_min: u64,
    /// Window end (iteration index, inclusive).
    #[arg(long)]
    pub t_max: u64,
    /// JSON output path; defaults to `<trace>.rates.json`.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Serialize)]
struct RateJson {
    field: String,
    slope: f64,
    intercept: f64,
    r2: f64,
    t_min: u64,
    t_max: u64,
    samples: usize,
}

pub fn run(args: RatesArgs) -> Result<(), CliError> {
    let field = GapField::parse(&args.field).ok_or_else(|| {
        CliError::config(format!(
            "unknown field {:?}; valid: {}",
            args.field,
            GapField::all_names().join(", ")
        ))
    })?;
    if args.t_min >= args.t_max {
        return Err(CliError::config(format!(
            "empty window: t_min {} >= t_max {}",
            args.t_min, args.t_max
        )));
    }
    let trace = trace_io::read(&args.trace)?;
    let fit =
        fit_rate_slope(&trace, field, (args.t_min, args.t_max)).map_err(CliError::from_core)?;
    println!(
        "field={} slope={:.6} intercept={:.6} r2={:.6} samples={} window=[{}, {}]",
        args.field, fit.slope, fit.intercept, fit.r2, fit.samples, args.t_min, args.t_max
    );
    let json_path = args.json.unwrap_or_else(|| {
        let mut p = args.trace.clone().into_os_string();
        p.push(".rates.json");
        PathBuf::from(p)
    });
    let payload = RateJson {
        field: args.field,
        slope: fit.slope,
        intercept: fit.intercept,
        r2: fit.r2,
        t_min: args.t_min,
        t_max: args.t_max,
        samples: fit.samples,
    };
    std::fs::write(
        &json_path,
        serde_json::to_string_pretty(&payload).expect("serializes"),
    )
    .map_err(|e| CliError::config(format!("cannot write {}: {e}", json_path.display())))?;
    Ok(())
}
