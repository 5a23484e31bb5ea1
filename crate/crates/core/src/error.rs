use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{what} did not converge: {detail}")]
    Convergence { what: String, detail: String },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension {dim} exceeds the dense limit {limit}; restrict to a charge sector")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn convergence(what: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Convergence {
            what: what.into(),
            detail: detail.into(),
        }
    }
}
