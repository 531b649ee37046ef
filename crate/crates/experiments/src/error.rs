use std::path::PathBuf;

use thiserror::Error;

/// Failure of an experiment run, grouped by process exit code.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),

    #[error("training diverged at step {step}: {detail}")]
    Diverged { step: usize, detail: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] fprinciple::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Diverged { .. } => 3,
            RunError::Io { .. } => 4,
            RunError::Core(fprinciple::Error::Io(_)) => 4,
            RunError::Core(fprinciple::Error::NonFinite(_)) => 3,
            RunError::Core(_) => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> RunError {
        let path = path.into();
        move |source| RunError::Io { path, source }
    }
}

pub type RunResult<T> = Result<T, RunError>;
