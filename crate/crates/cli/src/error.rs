use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] jcsim_core::Error),

    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0} validation check(s) failed")]
    ValidationFailed(usize),
}

impl CliError {
    /// 2 for bad input, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if e.is_config() => 2,
            CliError::Core(_) => 3,
            CliError::Io { .. } | CliError::ValidationFailed(_) => 1,
        }
    }
}
