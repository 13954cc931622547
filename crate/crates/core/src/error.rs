use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the optimization library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid design space: {}", .0.join("; "))]
    InvalidSpace(Vec<String>),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("option index {index} out of range for variable `{variable}` ({options} options)")]
    IndexOutOfRange {
        variable: String,
        index: usize,
        options: usize,
    },

    #[error("unknown option `{label}` for variable `{variable}`")]
    UnknownOption { variable: String, label: String },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("objective arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },

    #[error("unevaluated design vector [{0}]")]
    Unevaluated(String),

    #[error("evaluation failed for design vector [{vector}]: {message}")]
    Backend { vector: String, message: String },

    #[error("full factorial needs {required} evaluations, budget cap is {cap}")]
    BudgetExceeded { required: u128, cap: u128 },

    #[error("evaluation budget {budget} is below one generation ({needed} evaluations)")]
    BudgetTooSmall { budget: u64, needed: u64 },

    #[error("missing surrogate coefficient: {0}")]
    MissingCoefficient(String),

    #[error("degenerate benchmark: global Pareto front has {0} point(s), expected at least 2")]
    DegenerateBenchmark(usize),

    #[error("config error: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
