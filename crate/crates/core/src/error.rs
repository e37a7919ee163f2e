use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("element index {index} out of range for a {len}-element array")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("polar grid is empty; check r_min/r_max against the ring policy")]
    EmptyGrid,

    #[error("{what} needs {requested} elements, cap is {cap}")]
    CapacityExceeded {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("selected sub-dictionary is rank deficient at atom {atom}")]
    RankDeficient { atom: usize },

    #[error("constraint unsatisfiable: {0}")]
    Unsatisfiable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
