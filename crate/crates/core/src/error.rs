use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum StaError {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("degenerate spectrum: level splitting {splitting:e} below threshold")]
    Degenerate { splitting: f64 },

    #[error("matrix is not a traceless Hermitian qubit Hamiltonian: {0}")]
    NotHermitian(String),

    #[error("time {t} ns outside the allowed range [{lo}, {hi}] ns")]
    Range { t: f64, lo: f64, hi: f64 },

    #[error("invalid propagator configuration: {0}")]
    Config(String),

    #[error("protocol precondition violated: {0}")]
    Protocol(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("fit failed: {0}")]
    FitFailure(String),
}

pub type Result<T> = std::result::Result<T, StaError>;
