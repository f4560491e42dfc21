//! Trace CSV serialization: fixed nine-column header, LF line endings,
//! shortest round-trip float formatting, empty cells for absent gaps. All
//! fields are plain numbers, so no quoting is ever required.

use std::path::Path;

use ircg::TraceRecord;

use crate::CliError;

pub const HEADER: &str = "t,oracle_calls,wall_ms,f_gap_x,g_gap_x,f_gap_z,g_gap_z,sigma_t,alpha_t";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

pub fn to_csv(trace: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for r in trace {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.t,
            r.oracle_calls,
            r.wall_ms,
            opt(r.f_gap_x),
            opt(r.g_gap_x),
            opt(r.f_gap_z),
            opt(r.g_gap_z),
            r.sigma_t,
            r.alpha_t,
        ));
    }
    out
}

pub fn write(path: &Path, trace: &[TraceRecord]) -> Result<(), CliError> {
    std::fs::write(path, to_csv(trace))
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}

pub fn read(path: &Path) -> Result<Vec<TraceRecord>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::config(format!("{}: empty trace", path.display())))?;
    if header.trim() != HEADER {
        return Err(CliError::config(format!(
            "{}: unexpected trace header {header:?}",
            path.display()
        )));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(CliError::config(format!(
                "{}: row {} has {} fields, expected 9",
                path.display(),
                i + 2,
                fields.len()
            )));
        }
        let num = |s: &str, what: &str| -> Result<f64, CliError> {
            s.trim().parse().map_err(|_| {
                CliError::config(format!(
                    "{}: row {}: bad {what} {s:?}",
                    path.display(),
                    i + 2
                ))
            })
        };
        let opt_num = |s: &str, what: &str| -> Result<Option<f64>, CliError> {
            if s.trim().is_empty() {
                Ok(None)
            } else {
                num(s, what).map(Some)
            }
        };
        out.push(TraceRecord {
            t: num(fields[0], "t")? as u64,
            oracle_calls: num(fields[1], "oracle_calls")? as u64,
            wall_ms: num(fields[2], "wall_ms")?,
            f_gap_x: opt_num(fields[3], "f_gap_x")?,
            g_gap_x: opt_num(fields[4], "g_gap_x")?,
            f_gap_z: opt_num(fields[5], "f_gap_z")?,
            g_gap_z: opt_num(fields[6], "g_gap_z")?,
            sigma_t: num(fields[7], "sigma_t")?,
            alpha_t: num(fields[8], "alpha_t")?,
            est_err: None,
        });
    }
    Ok(out)
}
