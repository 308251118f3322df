use thiserror::Error;

use weightlab_core::Error as CoreError;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("experiment failed: {0}")]
    Failed(String),
}

impl CliError {
    /// 1 experiment failure, 2 configuration error, 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
            CliError::Failed(_) => 1,
            CliError::Core(e) => match e {
                CoreError::InvalidSetting(_)
                | CoreError::InvalidArgument(_)
                | CoreError::Unsupported(_) => 2,
                CoreError::ToleranceNotMet { .. } | CoreError::Bracket { .. } => 3,
                CoreError::Divergent(_)
                | CoreError::LocalIntegrability(_)
                | CoreError::Verification(_) => 1,
            },
        }
    }
}
