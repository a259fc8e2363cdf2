use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A physical parameter violates its invariant (e.g. `g must be ≥ 0`).
    #[error("{0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// A function was evaluated outside its domain (e.g. on a pole).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("numerical error: {0}")]
    Numerical(String),
}

impl Error {
    /// True for errors caused by user input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::InvalidParameter(_) | Error::Config(_))
    }
}
