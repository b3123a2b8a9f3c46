//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node {node} out of range (graph has {num_nodes} nodes)")]
    NodeOutOfRange { node: u32, num_nodes: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("edge-set is empty")]
    EmptyEdgeSet,

    #[error("requested density too low: {0}")]
    DensityTooLow(String),

    #[error("network-label bias undefined for `{labelset}`: {reason}")]
    UndefinedBias { labelset: String, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error in {path} line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
