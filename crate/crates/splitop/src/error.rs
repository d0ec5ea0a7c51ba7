//! Error type shared across the emulator core.

use thiserror::Error;

/// Errors produced by parsing, validation, and numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Line-oriented input could not be parsed. Lines are 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Structurally valid input that violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two objects that must share a grid (or a space tag) do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Iterative routine exhausted its iteration budget.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// A NaN or infinity appeared where finite arithmetic was expected.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Dense-matrix work was requested above the configured size cap.
    #[error("problem size {size} exceeds cap {cap}")]
    SizeCap { size: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
