use thiserror::Error;

/// Errors raised by the lab's operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain of the weight family.
    #[error("parameter {value} outside weight domain [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },
    /// A tabulated weight family was queried beyond its table.
    #[error("index {index} beyond tabulated range {len}")]
    Range { index: usize, len: usize },
    /// A size, integer or truncation limit was exceeded.
    #[error("capacity exceeded in {context}: {detail}")]
    Capacity { context: String, detail: String },
    /// A malformed descriptor or argument.
    #[error("invalid {what}: {detail}")]
    Invalid { what: String, detail: String },
    /// A convergence precondition does not hold.
    #[error("divergence: {0}")]
    Divergence(String),
    /// A requested resolution is finer than the sampling resolution.
    #[error("resolution {requested} not above sampling resolution {resolution}")]
    Resolution { requested: f64, resolution: f64 },
    /// Not enough data points for an estimate.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    /// Synthesis could not satisfy a clause after all escalations.
    #[error("synthesis failed in round {round}: clause {clause} ({detail})")]
    Synthesis {
        round: usize,
        clause: String,
        detail: String,
    },
}

impl Error {
    pub(crate) fn invalid(what: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Invalid {
            what: what.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn capacity(context: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Capacity {
            context: context.into(),
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
