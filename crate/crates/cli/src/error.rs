use thiserror::Error;

/// Failures of a subcommand, each tied to a process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerics(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Numerics(_) => 3,
            CliError::Io(_) => 4,
            CliError::Verification(_) => 5,
        }
    }
}

impl From<madelung_core::Error> for CliError {
    fn from(e: madelung_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerics(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
