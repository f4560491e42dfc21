//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("exponent {value} out of range for {context} (expected {expected})")]
    InvalidExponent {
        value: f64,
        context: &'static str,
        expected: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, got {got}{}", fmt_ctx(.context))]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("finite-sum oracle required: {0}")]
    MissingFiniteSum(&'static str),

    #[error("reset period q = {0} too small (need q >= 2 for a positive warm stepsize)")]
    PeriodTooSmall(usize),

    #[error("averaged iterate not yet defined at t = {t} (first defined at t = {first})")]
    NotYetDefined { t: usize, first: usize },

    #[error("no budget given: set max iterations and/or max oracle calls")]
    BudgetZero,

    #[error("budget exhausted before certification: best gap {best_gap:.3e} > {target:.3e}")]
    BudgetExhausted { best_gap: f64, target: f64 },

    #[error("operation requires exact gradients but the {0} oracle is streaming")]
    StreamingOracle(&'static str),

    #[error("no {0} reference value available on this problem")]
    MissingReference(&'static str),

    #[error(
        "stale inner reference: G(x) - g_opt = {gap:.3e} is below -g_tol = {:.3e}", -.tol
    )]
    StaleReference { gap: f64, tol: f64 },

    #[error("not enough data: {got} usable samples in window, need {need}")]
    InsufficientData { got: usize, need: usize },

    #[error("non-finite iterate detected at t = {t}")]
    NumericalFailure { t: usize },

    #[error("parse error at {path}:{row}{}: {msg}", fmt_col(.col))]
    ParseError {
        path: String,
        row: usize,
        col: Option<usize>,
        msg: String,
    },

    #[error("ragged rows in {path}: row {row} has {got} fields, expected {expected}")]
    RaggedRows {
        path: String,
        row: usize,
        got: usize,
        expected: usize,
    },

    #[error("non-ascending feature index at {path}:{row}: {index} after {prev}")]
    NonAscendingIndex {
        path: String,
        row: usize,
        index: usize,
        prev: usize,
    },

    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn fmt_ctx(ctx: &str) -> String {
    if ctx.is_empty() {
        String::new()
    } else {
        format!(" ({ctx})")
    }
}

fn fmt_col(col: &Option<usize>) -> String {
    match col {
        Some(c) => format!(" column {c}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
