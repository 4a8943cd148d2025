use thiserror::Error;

/// Errors raised by constant evaluation, quadrature and sweeps.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parameter grid is empty after filtering")]
    EmptyGrid,

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// Series extrapolation, optimizer or tail estimate failed.
    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
