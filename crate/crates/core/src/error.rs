use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("reward overflow: {what} is not representable as a finite f64")]
    Overflow { what: String },

    #[error("fixed goal sequence exhausted after {available} injected digits")]
    GoalExhausted { available: usize },

    #[error("inconsistent outcome: {0}")]
    InconsistentOutcome(String),

    #[error("action length {actual} does not match enumeration length {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("enumeration index overflows u128 for length {len}")]
    EnumerationOverflow { len: usize },

    #[error("observation eliminates every hypothesis (action {action}, reward {reward})")]
    EmptyPosterior { action: u8, reward: f64 },

    #[error("Blahut-Arimoto did not converge at beta={beta} after {iterations} iterations (last rate change {residual:e})")]
    NotConverged {
        beta: f64,
        iterations: usize,
        residual: f64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
