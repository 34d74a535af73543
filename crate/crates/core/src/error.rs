use thiserror::Error;

/// Errors raised by the library.
///
/// The CLI maps [`SpvtError::is_validation`] errors to exit code 2 and
/// everything else to exit code 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpvtError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("policy is not defined here: {0}")]
    Domain(String),

    #[error("size limit exceeded: {what} = {got} > {cap}")]
    SizeLimit {
        what: &'static str,
        got: usize,
        cap: usize,
    },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl SpvtError {
    /// True for errors caused by bad user input rather than numeric breakdown.
    pub fn is_validation(&self) -> bool {
        !matches!(self, SpvtError::Numeric(_) | SpvtError::Protocol(_))
    }
}

pub type Result<T, E = SpvtError> = std::result::Result<T, E>;

pub(crate) fn invalid_arg(msg: impl Into<String>) -> SpvtError {
    SpvtError::InvalidArgument(msg.into())
}
