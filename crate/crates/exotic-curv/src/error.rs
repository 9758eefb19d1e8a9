//! Error type shared by every module.

use thiserror::Error;

/// Failures reported by the geometric and numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the documented domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A construction degenerates at the given input.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// A field such as ζ is undefined at a pole; a branch must be supplied.
    #[error("pole: {0}")]
    Pole(String),
    /// A numeric nullspace could not be certified.
    #[error("nullspace not separated: {0}")]
    NullspaceGap(String),
    /// An equation has no solution for the given data.
    #[error("no solution: {0}")]
    NoSolution(String),
    /// A linear system is too badly conditioned to trust.
    #[error("ill-conditioned system: {0}")]
    IllConditioned(String),
    /// A profile function violates its constraints.
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    /// Finite differences failed their internal consistency checks.
    #[error("finite-difference failure: {0}")]
    FiniteDifference(String),
    /// A configuration file could not be parsed.
    #[error("config error at line {line}, column {column}: {message}")]
    Config {
        /// One-based line number.
        line: usize,
        /// One-based column number.
        column: usize,
        /// Description of the problem.
        message: String,
    },
    /// An I/O operation failed.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
