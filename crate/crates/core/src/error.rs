// SPDX-License-Identifier: Apache-2.0

//! Error type shared by every layer of the crate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A precondition on a matrix argument (Hermiticity, squareness) was violated.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    /// Two dressed eigenstates claim the same bare label.
    #[error("degenerate dressed-state assignment: dressed states {first} and {second} both map to bare state {bare}")]
    Degeneracy { first: usize, second: usize, bare: usize },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("error-matrix anchor undefined: entry ({index},{index}) vanishes; try anchor index {suggestion}")]
    AnchorUndefined { index: usize, suggestion: usize },

    #[error("gradient evaluation failed for parameter {parameter}: {reason}")]
    GradientEvaluation { parameter: String, reason: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SynthError {
    fn from(e: std::io::Error) -> Self {
        SynthError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, SynthError>;
