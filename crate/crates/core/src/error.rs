use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, NatleError>;

#[derive(Debug, Error)]
pub enum NatleError {
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("image has zero area ({width}x{height})")]
    EmptyImage { width: usize, height: usize },

    #[error("non-finite smoothness weight at pixel {index}")]
    NonFiniteWeight { index: usize },

    #[error("beta must be non-negative, got {0}")]
    NegativeBeta(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("dense oracle refuses order {order} (limit {limit})")]
    OracleTooLarge { order: usize, limit: usize },

    #[error("matrix is singular")]
    Singular,

    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Unwritable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported or corrupt image {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("image {path} exceeds dimension limits: {message}")]
    DimensionOverflow { path: PathBuf, message: String },
}
