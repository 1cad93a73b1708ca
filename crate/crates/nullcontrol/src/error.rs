//! Error type shared across the crate.

use std::fmt;

/// Crate-wide error. The CLI maps `InvalidInput` to exit code 2 and the
/// numerical variants to exit code 3.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Precondition or configuration violation detected before computing.
    InvalidInput(String),
    /// A requested construction cannot be carried out (e.g. too few
    /// admissible points, certificate chain too long to be useful).
    Infeasible(String),
    /// A numerical procedure failed to reach its required tolerance.
    Numerical(String),
    /// Filesystem / IO trouble while reading config or writing output.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(m) => write!(f, "invalid input: {m}"),
            Error::Infeasible(m) => write!(f, "infeasible: {m}"),
            Error::Numerical(m) => write!(f, "numerical failure: {m}"),
            Error::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
