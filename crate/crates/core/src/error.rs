use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid setting: {0}")]
    InvalidSetting(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("tolerance not met: estimate {estimate:e} with error bound {error:e}")]
    ToleranceNotMet { estimate: f64, error: f64 },

    #[error("not locally integrable: {0}")]
    LocalIntegrability(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("bisection bracket failure: lo={lo:e} hi={hi:e} ({detail})")]
    Bracket { lo: f64, hi: f64, detail: String },

    #[error("verification failed: {0}")]
    Verification(String),
}
