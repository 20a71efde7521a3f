use std::path::{Path, PathBuf};

use dqd_qubit::Error as CoreError;
use thiserror::Error;

/// Exit codes: 0 success, 1 I/O, 2 partial convergence, 64 usage.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Artifact(String),

    /// Artifacts were written but some points or checks did not pass.
    #[error("{0}")]
    Partial(String),

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 64,
            Self::Io { .. } | Self::Artifact(_) => 1,
            Self::Partial(_) => 2,
            Self::Core(e) => match e {
                CoreError::Domain(_) | CoreError::Unstable { .. } => 64,
                CoreError::MissingEntry { .. } | CoreError::Format(_) => 1,
                CoreError::NoConvergence { .. } => 2,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
