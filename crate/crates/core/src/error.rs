use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
///
/// Validation failures are separated from numerical failures so the CLI can
/// map them onto distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("quadrature did not converge: estimated error {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("Picard iteration did not converge in {iterations} iterations (last difference {last_difference:.3e}, last contraction ratio {last_ratio:.3})")]
    NoConvergence {
        iterations: usize,
        last_difference: f64,
        last_ratio: f64,
    },

    #[error("blow-up detected at t = {time:.6} (last finite state at t = {last_valid:.6})")]
    BlowUp { time: f64, last_valid: f64 },

    #[error("grid under-resolved: {0}")]
    UnderResolved(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_) | Error::GridMismatch(_) | Error::Format(_) | Error::Io { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
