use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed rankings, states, pairs or other user input.
    #[error("invalid input: {0}")]
    Input(String),

    /// A numeric parameter (noise weight, object count, alpha, ...) is out of range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The request exceeds what an exhaustive enumeration can handle.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Conditioning on an event of probability zero.
    #[error("undefined quantity: {0}")]
    Domain(String),

    /// Both groups of a comparison have zero standard error.
    #[error("degenerate comparison: combined standard error is zero")]
    DegenerateComparison,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

pub(crate) fn parameter(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
