use alloc::string::String;

/// Errors raised by the segmentation library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument violated an operation's precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A solver configuration is inconsistent or outside its stable range.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// The iteration produced a NaN or infinite value.
    #[error("numeric failure: non-finite level-set value at iteration {iteration}")]
    NumericFailure { iteration: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
