use thiserror::Error;

use crate::density::DensityCertificate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The backward trajectory leaves H before the requested time.
    #[error("backward time {requested} exceeds the horizon {horizon} (open endpoint: {open})")]
    HorizonExceeded {
        horizon: f64,
        open: bool,
        requested: f64,
    },

    #[error("state is not in D: backward horizon is {horizon}")]
    NotInD { horizon: f64 },

    #[error("class is not in E_-t for t = {t}: canonical offset is {offset}")]
    NotInEMinusT { t: f64, offset: f64 },

    #[error("state is outside the generator domain: {0}")]
    NotInDomain(String),

    #[error("preimage oracle failed at step {step}: {reason}")]
    OracleFailed {
        step: usize,
        reason: String,
        partial: Box<DensityCertificate>,
    },

    #[error("functional is not representable: {0}")]
    Unrepresentable(String),

    #[error("truncation needs more than {limit} modes to reach tail norm {eps}")]
    TruncationTooLarge { limit: usize, eps: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures that come from the mathematics (horizon, domain,
    /// representability) rather than from malformed input.
    pub fn is_domain(&self) -> bool {
        !matches!(self, Error::InvalidArgument(_) | Error::Parse(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
