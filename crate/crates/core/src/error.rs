use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A distribution or formula was called outside its parameter domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Cholesky factorization hit a non-positive pivot.
    #[error("matrix is not positive definite (pivot {pivot}, value {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    /// Configuration that makes a posterior improper or undefined.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("linear predictor {linear_predictor} overflows exp()")]
    Overflow { linear_predictor: f64 },

    #[error("sampled {what} fell below the numerical floor twice")]
    Underflow { what: &'static str },

    #[error("unknown coefficient `{0}`")]
    Lookup(String),

    #[error("record {index}: {message}")]
    Ingestion { index: usize, message: String },

    #[error("dataset failed validation: {0}")]
    InvalidDataset(String),

    #[error("chain failed at iteration {iteration}: {source}")]
    Chain {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("jitter replicate {replicate} failed: {source}")]
    Replicate {
        replicate: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::NotPositiveDefinite { .. } | Error::Overflow { .. } | Error::Underflow { .. } => {
                true
            }
            // anything that goes wrong once a chain is running is a sampling failure
            Error::Chain { .. } | Error::Replicate { .. } => true,
            _ => false,
        }
    }
}
