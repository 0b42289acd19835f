use thiserror::Error;

/// Errors produced by the `anonlip` library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("walk rate must lie in (0, 1], got {0}")]
    InvalidRate(f64),

    #[error("perturbation delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),

    #[error("probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("instance exceeds size budget: {0}")]
    BudgetExceeded(String),

    #[error("computation integrity check failed: {0}")]
    Integrity(String),

    #[error("root not bracketed: g({lo}) = {g_lo}, g({hi}) = {g_hi}")]
    NoBracket {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error("malformed game: {0}")]
    MalformedGame(String),
}

impl Error {
    /// Short stable identifier, suitable for machine-parsable diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidRate(_) => "invalid_rate",
            Error::InvalidDelta(_) => "invalid_delta",
            Error::InvalidProbability(_) => "invalid_probability",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::BudgetExceeded(_) => "budget_exceeded",
            Error::Integrity(_) => "integrity",
            Error::NoBracket { .. } => "no_bracket",
            Error::MalformedGame(_) => "malformed_game",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidDelta(delta))
    }
}
