use thiserror::Error;

use crate::hypothesis::LayoutViolation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid level {0}: {1}")]
    InvalidLevel(f64, &'static str),

    #[error("invalid block layout: {0}")]
    Layout(#[from] LayoutViolation),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parameter {param} would carry both a positive and a negative claim")]
    DirectionConflict { param: usize },

    #[error("unknown {what} `{got}`; valid values: {valid}")]
    UnknownTag {
        what: &'static str,
        got: String,
        valid: &'static str,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
