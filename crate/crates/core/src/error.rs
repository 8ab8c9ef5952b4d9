use thiserror::Error;

/// Errors raised by the detector library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A filter or model parameter is outside its valid domain.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// Frame or kernel dimensions are incompatible.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A direction cannot be decoded because the response vector vanishes.
    #[error("motion direction is undefined: {0}")]
    UndefinedDirection(String),

    /// A stimulus description cannot be rendered.
    #[error("invalid stimulus: {0}")]
    Stimulus(String),
}

impl Error {
    pub(crate) fn parameter(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
