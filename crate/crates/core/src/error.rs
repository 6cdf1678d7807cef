use thiserror::Error;

/// Errors raised by the laboratory. Every contract violation named in the
/// module docs maps onto one of these variants.
#[derive(Debug, Error)]
pub enum Error {
    #[error("system mismatch: expected {expected}, got {found}")]
    SystemMismatch { expected: String, found: String },

    #[error("role mismatch: cannot compose {left} with {right}")]
    RoleMismatch { left: &'static str, right: &'static str },

    #[error("{0} is not a composite system")]
    NotComposite(String),

    #[error("{op} requires a {expected} system, got {found}")]
    WrongTheory {
        op: &'static str,
        expected: &'static str,
        found: String,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid transformation: {0}")]
    InvalidTransform(String),

    #[error("invalid subset: {0}")]
    InvalidSubset(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("enumeration cap exceeded: {what} = {value} > {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("incomplete frame: {slits} slits on a system of capacity {capacity}")]
    IncompleteFrame { slits: usize, capacity: usize },

    #[error("not perfectly distinguishable: {0}")]
    NotDistinguishable(String),

    #[error("kick-back failed: {0}")]
    KickBack(String),

    #[error("oracle system: {0}")]
    Oracle(String),

    #[error("k = {k} is below the maximal interference order (residual {residual:e})")]
    OrderTooLow { k: usize, residual: f64 },

    #[error("premise failed: {0}")]
    Premise(String),

    #[error("malformed problem: {0}")]
    Problem(String),

    #[error("amplification: {0}")]
    Amplify(String),

    #[error("register mismatch: {0}")]
    Register(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
