use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed data in {path} line {line}: {msg}")]
    Data { path: PathBuf, line: usize, msg: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("bound violated at epoch {epoch}, group {group}: {quantity} = {value:e} outside [{lower:e}, {upper:e}]")]
    Sandwich {
        epoch: usize,
        group: String,
        quantity: &'static str,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error(transparent)]
    Core(#[from] diagfim::Error),
}

impl HarnessError {
    /// 1 for bad input, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Numerical(_) | HarnessError::Sandwich { .. } => 2,
            HarnessError::Core(diagfim::Error::NonFinite(_)) => 2,
            _ => 1,
        }
    }
}
