use thiserror::Error;

/// Errors produced by the sketches, the oracle and the stream readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("timestamp {t} precedes landmark {landmark}")]
    BeforeLandmark { t: f64, landmark: f64 },

    #[error("item timestamp {item} is later than evaluation time {at}")]
    FutureItem { item: f64, at: f64 },

    #[error("decayed weight is not finite at t = {t}")]
    Overflow { t: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),

    #[error("out-of-order arrival: t = {t} after t = {last}")]
    OutOfOrder { t: f64, last: f64 },

    #[error("snapshot format: {0}")]
    Format(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for errors caused by bad parameters rather than bad input data.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::InvalidArgument(_) | Error::Unsupported(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
