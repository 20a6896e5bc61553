use thiserror::Error;

/// Errors raised by state construction, measurement and the statistics routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("non-finite amplitude at index {0}")]
    NonFinite(usize),

    #[error("capacity exceeded for {what}: {requested} requested, limit is {limit}")]
    Capacity {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not unitary: deviation {deviation:e} exceeds {tol:e}")]
    NotUnitary { deviation: f64, tol: f64 },

    #[error("state is not normalized: squared norm {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("{kind} slot {index} out of range (have {count})")]
    SlotOutOfRange {
        kind: &'static str,
        index: usize,
        count: usize,
    },

    #[error("observer {observer} has no prior record in basis {basis_id}")]
    NotPreviouslyMeasured { observer: usize, basis_id: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
