use std::fmt;

use transferkit::Error;

pub const MALFORMED: u8 = 2;
pub const NOT_HERMITIAN: u8 = 3;
pub const NO_CONVERGENCE: u8 = 4;
pub const RESOURCE: u8 = 5;
pub const MARGINAL_TOO_LARGE: u8 = 6;
/// `compare --tol` found the inputs too far apart.
pub const MISMATCH: u8 = 1;

/// A diagnostic for stderr and the process exit code that goes with it.
#[derive(Debug, Clone)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn malformed(message: impl Into<String>) -> Self {
        Self::new(MALFORMED, message)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::NotHermitian { .. } => NOT_HERMITIAN,
            Error::ResourceExhausted { .. } => RESOURCE,
            Error::NumericalBreakdown(_) | Error::Backend(_) | Error::NotPositiveDefinite { .. } => NO_CONVERGENCE,
            Error::InvalidArgument(_) | Error::DimensionMismatch { .. } => MALFORMED,
        };
        Self::new(code, e.to_string())
    }
}

pub type Outcome<T> = Result<T, Failure>;
