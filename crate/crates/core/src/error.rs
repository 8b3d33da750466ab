use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter or configuration value is outside its domain.
    #[error("invalid {field}: {reason}")]
    Validation { field: &'static str, reason: String },

    /// An integrator or simulator produced a non-finite state.
    #[error("non-finite state at t = {time}")]
    Divergence { time: f64 },

    /// Two evaluation routes that must agree did not.
    #[error("invariant violated: {what} (deviation {deviation:e})")]
    Invariant { what: &'static str, deviation: f64 },

    /// Adaptive quadrature hit its subdivision limit above the target error.
    #[error("quadrature did not converge: estimated error {estimated_error:e} > {tolerance:e}")]
    Quadrature {
        estimated_error: f64,
        tolerance: f64,
    },

    #[error("singular linear system: {0}")]
    Singular(&'static str),
}

impl Error {
    pub(crate) fn validation(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }
}
