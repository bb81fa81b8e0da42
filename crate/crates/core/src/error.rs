use thiserror::Error;

use crate::tomography::DensityMatrix;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("polar decomposition failed: matrix is singular (|det| = {det:e})")]
    DecompositionFailed { det: f64 },

    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),

    #[error("degenerate tomography data: {0}")]
    DegenerateData(String),

    /// The optimizer hit its iteration cap. The best iterate found so far is
    /// carried along so callers can still inspect it.
    #[error("maximum-likelihood fit did not converge after {iterations} iterations")]
    Convergence {
        iterations: usize,
        best: Box<DensityMatrix>,
    },

    #[error("Fock cutoff {cutoff} too small: truncated tail mass {tail:e} exceeds 1e-12")]
    CutoffTooSmall { cutoff: usize, tail: f64 },

    #[error("outside the two-mode squeezed state model: {0}")]
    OutOfModel(String),

    #[error("config error{}: {message}", location.as_ref().map(|l| format!(" ({l})")).unwrap_or_default())]
    Config {
        location: Option<String>,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(location: Option<String>, message: impl Into<String>) -> Self {
        Error::Config {
            location,
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidInput(_) | Error::UnsupportedConfiguration(_) => 2,
            Error::Convergence { .. } => 3,
            _ => 1,
        }
    }
}
