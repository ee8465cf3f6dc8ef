//! Error taxonomy shared by the whole pipeline.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A model or sweep parameter violates its invariants.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An analytic contour was requested outside its field-strength regime.
    #[error("regime violation: {0}")]
    Regime(String),

    /// A linear-algebra kernel failed or produced a corrupted result.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Too much spectral weight fell outside the histogram span.
    #[error(
        "histogram span too small: {overflow_percent:.3}% of the weight fell outside \
         +/-{span:.6e} (limit 1%); rerun with span >= {suggested:.6e}"
    )]
    SpanTooSmall {
        span: f64,
        overflow_percent: f64,
        suggested: f64,
    },

    /// An accumulator was finalized before any realization was added.
    #[error("empty accumulator: no realizations accumulated")]
    EmptyAccumulator,

    /// A fit was attempted with fewer usable samples than parameters.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Width extraction found no half-maximum crossing inside its window.
    #[error("no half-maximum crossing within the search window (0, {window:.6e})")]
    WindowExhausted { window: f64 },

    /// A configuration file failed to parse or validate.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Config(err.to_string())
    }
}

impl Error {
    /// Process exit code for the CLI, grouped by error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::Config(_) => 2,
            Error::Regime(_) => 3,
            Error::Numeric(_) => 4,
            Error::SpanTooSmall { .. } => 5,
            Error::EmptyAccumulator | Error::InsufficientData(_) | Error::WindowExhausted { .. } => 6,
            Error::Io(_) => 7,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
