use std::io;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("index {index} out of range for {len} variables")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid basis vector: {0}")]
    InvalidBasis(String),

    #[error("invalid pair selection: {0}")]
    InvalidPairs(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("normal equations are singular")]
    Singular,

    #[error("trial {trial} (method {method}, cut {cut}) failed: {source}")]
    Trial {
        method: String,
        cut: usize,
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Dimension {
            context,
            expected,
            actual,
        })
    }
}
