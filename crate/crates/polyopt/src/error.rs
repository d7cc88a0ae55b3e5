use polyopt_core::{AlgebraError, CompileError, SolveError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("artifact format version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("artifact was compiled from a different problem (hash {artifact}, problem file {problem})")]
    HashMismatch { artifact: String, problem: String },
    #[error("invalid problem: {0}")]
    Problem(String),
    #[error("invalid artifact: {0}")]
    Artifact(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("CSV output: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io { path: path.display().to_string(), source }
    }
}
