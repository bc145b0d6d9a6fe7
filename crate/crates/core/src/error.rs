use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(
        "operator is not Hermitian: |X[{row},{col}] - conj(X[{col},{row}])| = {asymmetry:e} exceeds {tolerance:e}"
    )]
    NotHermitian {
        asymmetry: f64,
        row: usize,
        col: usize,
        tolerance: f64,
    },

    #[error("operator is not positive definite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("memory budget exceeded: {what} needs {} MiB, budget is {budget_mib} MiB", mib_text(*.required_mib))]
    ResourceExhausted {
        what: String,
        required_mib: u64,
        budget_mib: u64,
    },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("linear algebra backend failed: {0}")]
    Backend(String),
}

fn mib_text(mib: u64) -> String {
    if mib == u64::MAX {
        "more than 2^64".to_string()
    } else {
        mib.to_string()
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
