use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A scenario-configuration field failed validation.
    #[error("config: {field}: {reason}")]
    Config { field: String, reason: String },

    /// An operation was called outside its mathematical domain.
    #[error("domain: {0}")]
    Domain(String),

    /// The requested distance lies beyond the line-of-sight horizon, where
    /// the piecewise loss model defines nothing.
    #[error("distance {d:.1} m is beyond the line-of-sight horizon d_los = {d_los:.1} m")]
    BeyondHorizon { d: f64, d_los: f64 },

    /// The explicit integration step is too large for the shadowing
    /// mean-reversion rate.
    #[error("explicit scheme unstable: m*dt = {m_dt} >= 1, reduce dt")]
    Unstable { m_dt: f64 },

    /// Statistical routine failed (empty input, degenerate fit, ...).
    #[error("stats: {0}")]
    Stats(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
