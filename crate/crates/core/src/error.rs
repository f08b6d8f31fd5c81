use std::fmt;

use thiserror::Error;

/// Failure to turn text into an [`Expr`](crate::expr::Expr).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the input where the problem was detected.
    pub offset: usize,
    pub message: String,
    /// What the parser would have accepted at `offset`.
    pub expected: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at offset {}: {} (expected {})",
            self.offset, self.message, self.expected
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("domain violation in `{expr}` at x = {x}: {reason}")]
    Domain {
        expr: String,
        x: f64,
        reason: String,
    },

    #[error(
        "quadrature on [{lo}, {hi}] did not reach tolerance {tolerance:e} (estimated error {estimate:e})"
    )]
    ToleranceNotMet {
        lo: f64,
        hi: f64,
        tolerance: f64,
        estimate: f64,
    },

    #[error("cannot differentiate `{0}`: it has no symbolic backing")]
    UnsupportedDifferentiation(String),

    #[error("zero derivative at iterate x = {x}")]
    ZeroDerivative { x: f64 },

    #[error("matrix maps the current iterate to the zero vector at step {step}")]
    ZeroImage { step: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(expr: impl fmt::Display, x: f64, reason: impl Into<String>) -> Self {
        Error::Domain {
            expr: expr.to_string(),
            x,
            reason: reason.into(),
        }
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
