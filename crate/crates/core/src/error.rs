use alloc::string::String;

/// Errors raised by the core numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Inconsistent vector or matrix dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// Every observation carries zero weight or an infinitely small density.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// A linear system could not be factorized.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// A raw table does not follow the documented column layout.
    #[error("ingestion error: {0}")]
    Ingestion(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::error::Error::Domain(alloc::format!($($arg)*)) };
}
macro_rules! dimension {
    ($($arg:tt)*) => { $crate::error::Error::Dimension(alloc::format!($($arg)*)) };
}
pub(crate) use {dimension, domain};
