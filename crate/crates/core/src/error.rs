use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("invalid opinion state: {0}")]
    InvalidState(String),

    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("subset must not be empty")]
    EmptySubset,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{}", format_violations(.0))]
    Hypothesis(Vec<Violation>),

    #[error("invalid experiment spec: {}", .0.join("; "))]
    InvalidSpec(Vec<String>),

    #[error("usage error: {}", .0.join("; "))]
    Usage(Vec<String>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// A theorem hypothesis that failed, with both sides evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub statement: String,
    pub evaluated: String,
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| format!("hypothesis {} does not hold: {}", v.statement, v.evaluated))
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
