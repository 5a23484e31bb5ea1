use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot write output: {0}")]
    Output(String),

    #[error("assertion failed: {0}")]
    Assertion(String),

    #[error(transparent)]
    Core(#[from] mudecay_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use mudecay_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Assertion(_) => 1,
            CliError::Core(E::Config(_) | E::InvalidInput(_)) => 2,
            CliError::Core(E::Convergence { .. }) => 3,
            CliError::Core(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
