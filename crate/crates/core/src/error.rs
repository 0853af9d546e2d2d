use thiserror::Error;

/// Errors raised by the library layers. The CLI maps these onto exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("jump component `{0}` has no compensator quadrature; use its closed-form exponent")]
    UnsupportedComponent(&'static str),

    #[error("problem is ill-posed: artificial preference rate {0} is not positive")]
    IllPosed(String),

    #[error("surplus must be nonnegative, got {0}")]
    NegativeSurplus(f64),

    #[error("payout mode mismatch: expected {expected}")]
    ModeMismatch { expected: &'static str },

    #[error("policy iteration did not converge after {0} iterations")]
    NoConvergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
