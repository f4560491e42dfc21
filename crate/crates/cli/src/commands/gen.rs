//! `gen`: write deterministic synthetic data files.

use std::path::PathBuf;

use clap::Args;

use ircg::problems::io::write_csv;
use ircg::problems::{DictionaryData, LogisticData, RegressionData};

use crate::config_file::resolve_out_path;
use crate::CliError;

#[derive(Args)]
pub struct GenArgs {
    /// Generator name: regression, logistic, or dictionary.
    pub generator: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample count (inner level).
    #[arg(long)]
    pub n: Option<usize>,
    /// Feature dimension (regression, logistic).
    #[arg(long)]
    pub d: Option<usize>,
    /// Validation sample count (regression; defaults to n).
    #[arg(long)]
    pub n_val: Option<usize>,
    /// Constraint radius for the coefficient blocks (regression, dictionary).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Label-noise scale (regression).
    #[arg(long)]
    pub noise: Option<f64>,
    /// Constraint radius (logistic).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Data dimension per sample (dictionary).
    #[arg(long)]
    pub m: Option<usize>,
    /// Old dictionary size (dictionary).
    #[arg(long)]
    pub p_old: Option<usize>,
    /// Enriched dictionary size (dictionary); must exceed p-old.
    #[arg(long)]
    pub q_dict: Option<usize>,
    /// New-data sample count (dictionary; defaults to n).
    #[arg(long)]
    pub n_new: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

pub fn run(args: GenArgs) -> Result<(), CliError> {
    let out_dir = resolve_out_path(&args.out_dir);
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut written: Vec<PathBuf> = Vec::new();
    match args.generator.as_str() {
        "regression" => {
            let n = args.n.unwrap_or(200);
            let d = args.d.unwrap_or(50);
            let data = RegressionData::generate(
                args.seed,
                n,
                d,
                args.n_val.unwrap_or(n),
                args.delta.unwrap_or(10.0),
                args.noise.unwrap_or(0.0),
            );
            let train = out_dir.join("regression_train.csv");
            let val = out_dir.join("regression_val.csv");
            write_csv(&train, &data.a_tr, Some(&data.b_tr)).map_err(CliError::from_core)?;
            write_csv(&val, &data.a_val, Some(&data.b_val)).map_err(CliError::from_core)?;
            written.extend([train, val]);
        }
        "logistic" => {
            let data = LogisticData::generate(
                args.seed,
                args.n.unwrap_or(300),
                args.d.unwrap_or(40),
                args.beta.unwrap_or(20.0),
            );
            let path = out_dir.join("logistic_data.csv");
            write_csv(&path, &data.a, Some(&data.b)).map_err(CliError::from_core)?;
            written.push(path);
        }
        "dictionary" => {
            let p_old = args.p_old.unwrap_or(6);
            let q_dict = args.q_dict.unwrap_or(8);
            if q_dict <= p_old {
                return Err(CliError::config(format!(
                    "q_dict ({q_dict}) must exceed p_old ({p_old})"
                )));
            }
            let n = args.n.unwrap_or(40);
            let data = DictionaryData::generate(
                args.seed,
                args.m.unwrap_or(15),
                p_old,
                q_dict,
                n,
                args.n_new.unwrap_or(n),
                args.delta.unwrap_or(3.0),
            );
            for (name, matrix) in [
                ("dictionary_a_old.csv", &data.a_old),
                ("dictionary_a_new.csv", &data.a_new),
                ("dictionary_x_hat.csv", &data.x_hat),
            ] {
                let path = out_dir.join(name);
                write_csv(&path, matrix, None).map_err(CliError::from_core)?;
                written.push(path);
            }
        }
        other => {
            return Err(CliError::config(format!(
                "unknown generator {other:?}; valid: regression, logistic, dictionary"
            )))
        }
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}
