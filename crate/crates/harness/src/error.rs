use std::io;
use std::path::Path;

/// Harness failures, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] safe_rl_core::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    /// Reading an input file failed.
    #[error("{path}: {source}")]
    Input { path: String, source: io::Error },
    /// Writing results failed.
    #[error("{path}: {source}")]
    Output { path: String, source: io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn input(path: &Path, source: io::Error) -> Self {
        Self::Input { path: path.display().to_string(), source }
    }

    pub fn output(path: &Path, source: io::Error) -> Self {
        Self::Output { path: path.display().to_string(), source }
    }

    /// Exit status: 2 for anything the user can fix in the inputs, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Json(_) | Self::Model(_) | Self::Input { .. } => 2,
            Self::Output { .. } | Self::Csv(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
