use thiserror::Error;

/// Errors raised by the simulator and the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid qubit index: {0}")]
    Index(String),

    #[error("operator is not unitary (max |u†u - I| = {0:e})")]
    NotUnitary(f64),

    #[error("post-selection probability {0:e} is below the zero-probability threshold")]
    ZeroProbability(f64),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("state is not physical: {0}")]
    NotPhysical(String),

    #[error("bracket does not straddle the threshold: {0}")]
    Bracket(String),
}

pub type Result<T> = std::result::Result<T, Error>;
