use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index range {from}..{to} invalid for series of length {len}")]
    Range { from: usize, to: usize, len: usize },

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("insufficient training: need at least {needed} samples, got {got}")]
    InsufficientTraining { needed: usize, got: usize },

    #[error("degenerate variance estimate ({value:e}) below floor {floor:e}")]
    DegenerateVariance { value: f64, floor: f64 },

    #[error("monitor already stopped at k = {0}")]
    AlreadyStopped(usize),

    #[error("monitoring horizon of {0} samples exhausted")]
    HorizonExhausted(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no critical value cached for {0}")]
    MissingCriticalValue(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Short stable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Range { .. } => "range",
            Error::InsufficientData { .. } => "insufficient_data",
            Error::InsufficientTraining { .. } => "insufficient_training",
            Error::DegenerateVariance { .. } => "degenerate_variance",
            Error::AlreadyStopped(_) => "already_stopped",
            Error::HorizonExhausted(_) => "horizon_exhausted",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::MissingCriticalValue(_) => "missing_critical_value",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
