use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    RejectedInput(String),

    #[error("dimension mismatch: left has {left} elements, right has {right}")]
    Dimension { left: usize, right: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("AR fit failed: {0}")]
    Fit(String),

    #[error("prediction failed: {0}")]
    Prediction(String),

    #[error("variance is undefined for {count} sample(s)")]
    UndefinedVariance { count: u64 },

    #[error("index corruption: {0}")]
    IndexCorruption(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("series ordering violated at sample {index}: time {time} does not follow {previous}")]
    Ordering {
        index: usize,
        time: f64,
        previous: f64,
    },

    #[error("series is empty")]
    EmptySeries,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("no link between node {from} and node {to}")]
    NoLink { from: usize, to: usize },

    #[error("node {node}: illegal state transition {from} -> {to}")]
    StateTransition {
        node: usize,
        from: &'static str,
        to: &'static str,
    },

    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
