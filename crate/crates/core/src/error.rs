use thiserror::Error;

/// Errors raised by the key-rate toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The channel would require η = 1 with nonzero excess noise.
    #[error("singular channel: {0}")]
    Singularity(String),

    /// The operation is not defined for this input kind.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Fock truncation too small; `suggested` is a cutoff expected to pass.
    #[error("Fock cutoff {cutoff} leaves trace deficit {deficit:.3e}; try cutoff {suggested}")]
    Cutoff {
        cutoff: usize,
        deficit: f64,
        suggested: usize,
    },

    /// A density matrix has an eigenvalue below the clamping threshold.
    #[error("unphysical state: eigenvalue {0:.3e}")]
    Physicality(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
