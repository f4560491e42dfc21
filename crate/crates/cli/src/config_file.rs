//! Run-configuration files: sectioned key-value manifests (TOML) that pin a
//! problem, a solver setup, outputs, and reference handling. Unknown keys are
//! hard errors so checked-in manifests cannot drift silently.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ircg::config::{Budget, Method, SchedulePreset, SolverConfig};
use ircg::problem::ReferenceOptima;
use ircg::problems::{self, DictionaryData, LogisticData, RegressionData};
use ircg::vecmath::DenseMatrix;
use ircg::ProblemInstance;

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub reference: ReferenceSection,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_val: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_old: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_dict: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_new: Option<usize>,
    // file-based problems
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub val: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label_column: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_old: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_new: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_hat: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub method: String,
    #[serde(default = "default_preset")]
    pub preset: String,
    #[serde(default = "default_varsigma")]
    pub varsigma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch: Option<usize>,
    #[serde(default)]
    pub alpha_t_plus_1: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_oracle_calls: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_wall_ms: Option<u64>,
}

fn default_preset() -> String {
    "convex".into()
}

fn default_varsigma() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
    #[serde(default = "default_checkpoint")]
    pub checkpoint_every: u64,
}

fn default_checkpoint() -> u64 {
    100
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSection {
    /// Precomputed reference file to load for gap columns.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    /// Certification tolerance for the inner solve.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_max_iters: Option<usize>,
    /// Iterations for the noiseless bilevel value estimate; 0 skips it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bilevel_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bilevel_varsigma: Option<f64>,
    /// Where the `reference` command writes its result.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::config(format!("bad config {}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn build_problem(&self) -> Result<ProblemInstance, CliError> {
        let p = &self.problem;
        match p.generator.as_deref() {
            Some("regression") => {
                reject_keys(
                    &[
                        ("beta", p.beta.is_some()),
                        ("m", p.m.is_some()),
                        ("p_old", p.p_old.is_some()),
                        ("q_dict", p.q_dict.is_some()),
                        ("n_new", p.n_new.is_some()),
                    ],
                    "regression",
                )?;
                let n = p.n.unwrap_or(200);
                let d = p.d.unwrap_or(50);
                let n_val = p.n_val.unwrap_or(n);
                let delta = p.delta.unwrap_or(10.0);
                let noise = p.noise.unwrap_or(0.0);
                let seed = p.seed.unwrap_or(0);
                Ok(RegressionData::generate(seed, n, d, n_val, delta, noise).to_problem())
            }
            Some("logistic") => {
                reject_keys(
                    &[
                        ("n_val", p.n_val.is_some()),
                        ("noise", p.noise.is_some()),
                        ("delta", p.delta.is_some()),
                        ("m", p.m.is_some()),
                        ("p_old", p.p_old.is_some()),
                        ("q_dict", p.q_dict.is_some()),
                        ("n_new", p.n_new.is_some()),
                    ],
                    "logistic",
                )?;
                let n = p.n.unwrap_or(300);
                let d = p.d.unwrap_or(40);
                let beta = p.beta.unwrap_or(20.0);
                let seed = p.seed.unwrap_or(0);
                Ok(LogisticData::generate(seed, n, d, beta).to_problem())
            }
            Some("dictionary") => {
                reject_keys(
                    &[
                        ("d", p.d.is_some()),
                        ("n_val", p.n_val.is_some()),
                        ("noise", p.noise.is_some()),
                        ("beta", p.beta.is_some()),
                    ],
                    "dictionary",
                )?;
                let m = p.m.unwrap_or(15);
                let p_old = p.p_old.unwrap_or(6);
                let q_dict = p.q_dict.unwrap_or(8);
                let n = p.n.unwrap_or(40);
                let n_new = p.n_new.unwrap_or(n);
                let delta = p.delta.unwrap_or(3.0);
                let seed = p.seed.unwrap_or(0);
                if q_dict <= p_old {
                    return Err(CliError::config(format!(
                        "q_dict ({q_dict}) must exceed p_old ({p_old})"
                    )));
                }
                Ok(DictionaryData::generate(seed, m, p_old, q_dict, n, n_new, delta).to_problem())
            }
            Some(other) => Err(CliError::config(format!(
                "unknown generator {other:?}; valid: regression, logistic, dictionary"
            ))),
            None => self.build_problem_from_files(),
        }
    }

    fn build_problem_from_files(&self) -> Result<ProblemInstance, CliError> {
        let p = &self.problem;
        if let (Some(train), Some(val)) = (&p.train, &p.val) {
            let (a_tr, b_tr) = load_labeled(train, p.label_column, p.format.as_deref())?;
            let (a_val, b_val) = load_labeled(val, p.label_column, p.format.as_deref())?;
            let delta = p
                .delta
                .ok_or_else(|| CliError::config("file-based regression needs delta".into()))?;
            return Ok(
                RegressionData::from_matrices(a_tr, b_tr, a_val, b_val, delta).to_problem(),
            );
        }
        if let Some(data) = &p.data {
            let (a, b) = load_labeled(data, p.label_column, p.format.as_deref())?;
            let beta = p
                .beta
                .ok_or_else(|| CliError::config("file-based logistic needs beta".into()))?;
            let b = b
                .into_iter()
                .map(|v| if v == 0.0 { -1.0 } else { v })
                .collect();
            return Ok(LogisticData::from_matrices(a, b, beta).to_problem());
        }
        if let (Some(a_old), Some(a_new), Some(x_hat)) = (&p.a_old, &p.a_new, &p.x_hat) {
            let a_old = problems::load_matrix_csv(a_old).map_err(CliError::from_core)?;
            let a_new = problems::load_matrix_csv(a_new).map_err(CliError::from_core)?;
            let x_hat = problems::load_matrix_csv(x_hat).map_err(CliError::from_core)?;
            let q_dict = p
                .q_dict
                .ok_or_else(|| CliError::config("file-based dictionary needs q_dict".into()))?;
            let delta = p
                .delta
                .ok_or_else(|| CliError::config("file-based dictionary needs delta".into()))?;
            if x_hat.rows() >= q_dict {
                return Err(CliError::config(format!(
                    "q_dict ({q_dict}) must exceed the stored coefficient rows ({})",
                    x_hat.rows()
                )));
            }
            let data = DictionaryData {
                m: a_old.rows(),
                p_old: x_hat.rows(),
                q_dict,
                n: a_old.cols(),
                n_new: a_new.cols(),
                delta,
                a_old,
                a_new,
                x_hat,
            };
            return Ok(data.to_problem());
        }
        Err(CliError::config(
            "problem section needs either a generator or data file paths".into(),
        ))
    }

    pub fn build_solver_config(&self) -> Result<SolverConfig, CliError> {
        let s = &self.solver;
        let method = match s.method.as_str() {
            "ir-scg" => Method::IrScg,
            "ir-fscg" => Method::IrFscg,
            other => {
                return Err(CliError::config(format!(
                    "unknown method {other:?}; valid: ir-scg, ir-fscg"
                )))
            }
        };
        let preset = match s.preset.as_str() {
            "convex" => SchedulePreset::Convex,
            "nonconvex" => SchedulePreset::Nonconvex,
            other => {
                return Err(CliError::config(format!(
                    "unknown preset {other:?}; valid: convex, nonconvex"
                )))
            }
        };
        Ok(SolverConfig {
            method,
            preset,
            varsigma: s.varsigma,
            p: s.p,
            omega: s.omega,
            q: s.q,
            batch: s.batch,
            alpha_t_plus_1_variant: s.alpha_t_plus_1,
            seed: s.seed,
            budget: Budget {
                max_iters: s.max_iters,
                max_oracle_calls: s.max_oracle_calls,
                max_wall_ms: s.max_wall_ms,
            },
            checkpoint_every: self.output.checkpoint_every,
        })
    }
}

fn reject_keys(keys: &[(&str, bool)], generator: &str) -> Result<(), CliError> {
    for (name, present) in keys {
        if *present {
            return Err(CliError::config(format!(
                "key {name:?} is not valid for the {generator} generator"
            )));
        }
    }
    Ok(())
}

fn load_labeled(
    path: &Path,
    label_column: Option<usize>,
    format: Option<&str>,
) -> Result<(DenseMatrix, Vec<f64>), CliError> {
    match format {
        Some("libsvm") => problems::load_libsvm(path).map_err(CliError::from_core),
        Some("csv") | None => {
            let col = match label_column {
                Some(c) => c,
                None => {
                    // default: last column
                    let m = problems::load_matrix_csv(path).map_err(CliError::from_core)?;
                    m.cols() - 1
                }
            };
            problems::load_csv(path, col).map_err(CliError::from_core)
        }
        Some(other) => Err(CliError::config(format!(
            "unknown data format {other:?}; valid: csv, libsvm"
        ))),
    }
}

/// Reference values persisted by the `reference` command.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReferenceFile {
    pub g_opt: f64,
    pub g_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_opt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_tol: Option<f64>,
    /// False when a budget ran out before the requested certificate.
    pub certified: bool,
    pub settings: ReferenceSettings,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReferenceSettings {
    pub inner_eps: f64,
    pub inner_iters: usize,
    pub inner_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bilevel_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bilevel_varsigma: Option<f64>,
}

impl ReferenceFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("bad reference file {}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("serializes");
        std::fs::write(path, text)
            .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
    }

    pub fn to_refs(&self) -> ReferenceOptima {
        let mut refs = ReferenceOptima::inner_only(self.g_opt, self.g_tol);
        if let (Some(f_opt), Some(f_tol)) = (self.f_opt, self.f_tol) {
            refs = refs.with_bilevel(f_opt, f_tol);
        }
        refs
    }
}

/// Resolves an output path against `IRCG_OUT_DIR` when it is relative and the
/// variable is set.
pub fn resolve_out_path(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os("IRCG_OUT_DIR") {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}
