use thiserror::Error;

use crate::numerics::QuadratureError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error(transparent)]
    Quadrature(#[from] QuadratureError),

    /// A Monte Carlo estimator had nothing to average over.
    #[error("statistical failure: {0}")]
    Statistical(String),

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
