use thiserror::Error;

/// Errors raised by the numerical library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A constructor rejected its parameters.
    #[error("validation error: {0}")]
    Validation(String),

    /// An evaluation point lies outside the region where the object is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A sampled value was NaN or infinite.
    #[error("non-finite sample at node {index} (x = {x})")]
    NonFiniteSample { index: usize, x: f64 },

    /// The tail truncation policy could not be honoured.
    #[error("tail policy error: {0}")]
    TailPolicy(String),

    /// A problem setup is inconsistent (e.g. an operator form the kernel cannot support).
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical procedure failed to meet its own contract.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// An expansive evolution exceeded the allowed norm growth.
    #[error("growth guard: norm grew by a factor {ratio:.3e} at tau = {tau}")]
    GrowthGuard { tau: f64, ratio: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
