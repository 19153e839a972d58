use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("index out of bounds: {what} {index} (limit {limit})")]
    Bounds {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("unsupported Matrix Market field or layout: {0}")]
    UnsupportedField(String),

    #[error("graph is not symmetric: entry ({row}, {col}) has no mirror with equal weight")]
    Asymmetric { row: usize, col: usize },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("similarity undefined for node {node}: zero degree")]
    UndefinedSimilarity { node: usize },

    #[error("relevance values are equal ({value}); flip direction is undefined")]
    DegenerateOrder { value: f64 },

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("invalid data: {0}")]
    Data(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }
}
