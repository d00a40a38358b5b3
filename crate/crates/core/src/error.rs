use thiserror::Error;

/// Errors raised by the engine. Precondition failures carry the owning
/// module and parameter so callers can report them without extra context.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{module}: invalid {param}: {reason}")]
    InvalidParameter {
        module: &'static str,
        param: String,
        reason: String,
    },

    #[error("index {index} out of range [{lo}, {hi}]")]
    IndexOutOfRange { index: usize, lo: usize, hi: usize },

    #[error("process undefined at index {0}")]
    Undefined(usize),

    #[error("processes live on different lattice spaces")]
    SpaceMismatch,

    #[error("{what} violated at index {index}, node {node} (deviation {deviation:e})")]
    PropertyViolated {
        what: &'static str,
        index: usize,
        node: usize,
        deviation: f64,
    },

    #[error("no sign change for {what} on bracket [{lo}, {hi}] (values {f_lo:e}, {f_hi:e})")]
    NoBracket {
        what: &'static str,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("insufficient samples in bin {bin}: {count} < {min}")]
    InsufficientSamples { bin: String, count: usize, min: usize },

    #[error("non-integrable filter weight: {0}")]
    NonIntegrable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(module: &'static str, param: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        module,
        param: param.into(),
        reason: reason.into(),
    }
}
