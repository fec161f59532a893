use std::fmt;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration (exit 1).
    Usage(String),
    /// Unreadable or malformed input (exit 2).
    Data(String),
    /// The numerical pipeline failed (exit 3).
    Numeric(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Errors raised while fitting. Data-shaped core errors stay data errors;
/// rejected hyperparameters are configuration errors.
impl From<negfuse_core::Error> for CliError {
    fn from(e: negfuse_core::Error) -> Self {
        use negfuse_core::Error as E;
        match e {
            E::InvalidArgument(_) => CliError::Usage(e.to_string()),
            E::DimensionMismatch(_) | E::ZeroVarianceColumn { .. } => CliError::Data(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

pub fn data_err(e: impl fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}
