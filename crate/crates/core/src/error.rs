use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid loci: {0}")]
    InvalidLoci(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("size limit exceeded: {what} = {value} (max {max})")]
    SizeLimit {
        what: &'static str,
        value: usize,
        max: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("linear system is singular: {0}")]
    Singular(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("empty sample")]
    EmptySample,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
