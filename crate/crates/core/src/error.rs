//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A state violates `1 + sqrt(lambda) * w > 0`.
    #[error("inadmissible state: 1 + sqrt(lambda) * w = {gap:e} (lambda = {lambda}, w = {w})")]
    Inadmissible { lambda: f64, w: f64, gap: f64 },

    /// Invalid configuration or parameter value.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Requested value lies outside the range of a monotone map.
    #[error("value {value} outside range [{lo}, {hi}]")]
    Range { value: f64, lo: f64, hi: f64 },

    /// An iterative method did not reach its tolerance.
    #[error("{what} did not converge: {detail}")]
    NoConvergence { what: &'static str, detail: String },

    /// Degenerate trajectory that cannot be split into monotone pieces.
    #[error("classification error: {0}")]
    Classification(String),

    /// A root search found no sign change in its bracket.
    #[error("no root found: {0}")]
    NotFound(String),
}

pub type Result<T> = std::result::Result<T, Error>;
