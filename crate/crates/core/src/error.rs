//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("malformed number literal {literal:?}: {reason}")]
    BadLiteral { literal: String, reason: String },

    #[error("malformed word token {token:?}: {reason}")]
    BadWordToken { token: String, reason: String },

    #[error("pole at 0: coefficient {coefficient} at exponent {exponent}")]
    PoleAtZero { exponent: i64, coefficient: String },

    #[error("word is not a conjugate of a single generator")]
    NotConjugate,

    #[error("invalid input at {field}: {message}")]
    Validation { field: String, message: String },

    #[error("invalid input document: {0}")]
    Parse(String),

    #[error("free parameter assignment conflicts with the relator sum constraint: {0}")]
    InconsistentFreeValues(String),

    #[error("internal solve failed: {0}")]
    SingularSolve(String),

    #[error("{check} precondition violated: {message}")]
    Precondition { check: String, message: String },

    #[error("total infinitesimal rotation is zero; input degenerates the intersection pairing")]
    DegeneratePairing,

    #[error("total infinitesimal rotation is positive; flip the orientation of the stable measure")]
    PositiveTotalRotation,
}

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}
