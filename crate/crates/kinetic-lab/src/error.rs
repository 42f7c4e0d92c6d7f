//! Crate-wide error type.
//!
//! Variants are grouped by how the CLI maps them to exit codes: configuration
//! and input problems (exit 2), failed verification verdicts (exit 1), and
//! numerical breakdowns detected mid-computation (exit 3).

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid physical or numerical parameter before any computation ran.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Configuration file problem (syntax, unknown key, bad value).
    #[error("config error: {0}")]
    Config(String),

    /// Malformed data file (CSV matrix, JSON snapshot).
    #[error("parse error: {0}")]
    Parse(String),

    /// Non-positive density or temperature at a specific cell.
    #[error("non-physical state at cell {cell}: {what}")]
    NonPhysical { cell: usize, what: String },

    /// Moment extraction hit a degenerate distribution (zero mass, T <= 0).
    #[error("degenerate moments at cell {cell}: {what}")]
    DegenerateMoments { cell: usize, what: String },

    /// Gram matrix of the collision invariants is numerically singular.
    #[error("ill-conditioned nullspace basis (condition estimate {cond:.3e})")]
    IllConditioned { cond: f64 },

    /// Right-hand side of L g = h has a nullspace component above tolerance.
    #[error("solvability violated: |P h| / |h| = {ratio:.3e} exceeds {tol:.1e}")]
    Solvability { ratio: f64, tol: f64 },

    /// Iteration or eigensolve failed to reach its stated tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Solver produced non-finite values (CFL violation, overflow).
    #[error("solution blow-up at t = {time:.6e}: {what}")]
    BlowUp { time: f64, what: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit code the CLI should use for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Config(_) | Error::Parse(_) => 2,
            Error::NonPhysical { .. } | Error::DegenerateMoments { .. } => 2,
            Error::IllConditioned { .. }
            | Error::Solvability { .. }
            | Error::Numerical(_)
            | Error::BlowUp { .. } => 3,
            Error::Io(_) => 2,
        }
    }
}
