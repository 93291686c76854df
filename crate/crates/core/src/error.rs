use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed text input. `position` is a 0-based character offset into `input`.
    #[error("cannot parse '{token}' at position {position} of '{input}': {reason}")]
    Parse {
        input: String,
        token: String,
        position: usize,
        reason: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A search visited more nodes than allowed.
    #[error("node budget of {budget} exceeded at length {length}")]
    BudgetExceeded { budget: u64, length: usize },
}

impl Error {
    pub(crate) fn parse(input: &str, token: &str, position: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            input: input.to_string(),
            token: token.to_string(),
            position,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
