//! Crate-wide error type and result alias.
//!
//! Errors are grouped by how a caller should react:
//!
//! * [`Error::InvalidInput`] and [`Error::Config`] are caller mistakes —
//!   parameters outside the documented domain, malformed configuration files,
//!   unknown CLI values.  The command-line driver maps these to exit code 2.
//! * [`Error::Accuracy`], [`Error::Eigen`] and [`Error::InsufficientData`]
//!   mean the computation ran but could not certify its own result —
//!   quadrature refinement failed to stabilise, an eigensolve lost symmetry,
//!   a fit had too few points.  The driver maps these to exit code 3.
//! * [`Error::MemoryGuard`] protects against accidentally requesting dense
//!   objects that would not fit in memory (for example a full grid kernel
//!   with millions of points).
//! * [`Error::Io`] wraps file-system failures while writing reports.

use thiserror::Error;

/// Convenient alias used by every fallible function in the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Unified error type for the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the documented domain of an operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A computation finished but failed its internal accuracy certificate.
    #[error("accuracy failure: {0}")]
    Accuracy(String),

    /// A data set is too small for the requested statistic.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// An eigendecomposition failed or lost the symmetry it relies on.
    #[error("eigensolve failure: {0}")]
    Eigen(String),

    /// A request would allocate an unreasonably large dense object.
    #[error("memory guard: {0}")]
    MemoryGuard(String),

    /// A configuration file or command line could not be interpreted.
    #[error("configuration error: {0}")]
    Config(String),

    /// An underlying file-system operation failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the command-line driver.
    ///
    /// `0` is reserved for success; configuration and domain errors exit
    /// with `2`; accuracy-certificate failures exit with `3`.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Config(_) | Error::Io(_) | Error::MemoryGuard(_) => 2,
            Error::Accuracy(_) | Error::Eigen(_) | Error::InsufficientData(_) => 3,
        }
    }
}
