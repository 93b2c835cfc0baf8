use thiserror::Error;

/// Errors raised by the linear algebra, state, dynamics, and solver layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed matrix: {0}")]
    Malformed(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("control bound violated: channel {channel}, cell {cell}, value {value} exceeds u_max {u_max}")]
    ControlBound {
        channel: usize,
        cell: usize,
        value: f64,
        u_max: f64,
    },

    #[error("switching function has imaginary part {0:.3e}")]
    ComplexSwitching(f64),

    #[error("numerical breakdown: {0}")]
    Breakdown(String),
}

pub type Result<T> = std::result::Result<T, Error>;
