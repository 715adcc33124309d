use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Graph(#[from] kdv_star::graph::GraphError),
    /// A failed per-edge precondition, reported as a negative verdict.
    #[error("{0}")]
    Verdict(String),
    #[error("{0}")]
    BlowUp(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verdict(_) => 1,
            CliError::BlowUp(_) => 3,
            _ => 2,
        }
    }
}
