use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside the domain of a function or distribution.
    #[error("domain error: {0}")]
    Domain(String),

    /// A symmetric matrix could not be factorized even after jitter.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// Input data have inconsistent or unusable dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A sampler step failed; carries the iteration index.
    #[error("sampler failed at iteration {iteration}: {source}")]
    Sampler {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    /// The slice sampler could not produce a valid point.
    #[error("slice sampler: {0}")]
    Slice(String),

    /// Too few observations for the requested operation.
    #[error("too few observations: need at least {needed}, got {got}")]
    TooFew { needed: usize, got: usize },

    /// The requested operation does not apply to this model.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Invalid configuration or user input.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by the caller's configuration or input data
    /// rather than by a failure during computation.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Input(_) | Error::Dimension(_) | Error::Csv(_) | Error::Unsupported(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
