use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: expected {expected}, got {found}")]
    Dimension {
        op: &'static str,
        expected: String,
        found: String,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("non-finite entry {value} at position {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid sample directions: {0}")]
    Directions(String),

    #[error("evaluation failed at point {point:?}: {reason}")]
    Evaluation { point: Vec<f64>, reason: String },

    #[error("error bound not applicable: {0}")]
    BoundInapplicable(String),

    #[error("relative error undefined for a zero reference vector; use the absolute error instead")]
    ZeroReference,

    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn dimension(op: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        Error::Dimension {
            op,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
