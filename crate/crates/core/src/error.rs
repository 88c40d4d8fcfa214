use thiserror::Error;

/// Library-wide error type. Estimation routines distinguish input problems
/// (orders, dimensions, degenerate data) from numerical failures so callers
/// can map them to different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model orders: {0}")]
    InvalidOrders(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        got: String,
    },

    #[error("panel too short: {0}")]
    InsufficientData(String),

    #[error("unit {unit} is degenerate: {reason}")]
    DegenerateUnit { unit: String, reason: String },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("{stage} failed: {detail}")]
    FitFailure { stage: &'static str, detail: String },

    #[error("matrix {what} is numerically singular (condition number {cond:.3e})")]
    SingularMatrix { what: &'static str, cond: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
