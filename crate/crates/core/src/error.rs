use alloc::string::String;

/// Failure modes of the numerical core.
///
/// The split between input problems and numerical problems is load-bearing:
/// the command line maps the former to exit code 2 and the latter to 3.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("profiles live on different grids")]
    GridMismatch,
    #[error("newton iteration failed after {iterations} iterations, last residual {residual:e}")]
    NewtonFailure { iterations: usize, residual: f64 },
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("branch truncated before a crossing; last bracket [{lo}, {hi}]")]
    BranchTruncated { lo: f64, hi: f64 },
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures caused by the inputs rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::InvalidParameter(_) | Error::GridMismatch)
    }
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::InvalidParameter(alloc::format!($($fmt)+)));
        }
    };
}
pub(crate) use ensure;
