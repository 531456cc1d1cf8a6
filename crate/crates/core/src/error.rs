//! Shared error type.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoreError {
    /// A weight generating function has a pole `1 + v_j c = 0` at an integer
    /// content reachable by the requested diagrams.
    #[error("pole of weight generating function: denominator factor {factor_index} vanishes at content {content}")]
    PoleAtContent { factor_index: usize, content: i64 },

    #[error("partition size mismatch: |lambda| = {lhs}, |mu| = {rhs}")]
    SizeMismatch { lhs: u64, rhs: u64 },

    #[error("zero eigenvalue on s_{{{partition}}}: operator not invertible")]
    ZeroEigenvalue { partition: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("truncation cap too small: {0}")]
    Truncation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("expansion order budget exceeded: {0}")]
    OrderBudget(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
