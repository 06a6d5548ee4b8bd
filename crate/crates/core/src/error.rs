use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A cell problem for which no generated competitor passed admissibility.
    /// `problem` is the serialized offending problem.
    #[error("no admissible competitor generated for {problem}")]
    NoAdmissibleCompetitor { problem: String },

    /// A cell problem whose estimator failed for another reason.
    #[error("estimator failed on {problem}: {message}")]
    Estimator { problem: String, message: String },

    #[error("expression error: {0}")]
    Expression(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
