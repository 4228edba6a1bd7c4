use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure categories surfaced by the pipeline.
///
/// `is_numerical` splits them into caller mistakes (bad arguments, bad files)
/// and numerical breakdowns of otherwise valid input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),

    #[error("numerical conditioning: {0}")]
    Conditioning(String),

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("wav: {0}")]
    Wav(#[from] hound::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateSignal(_) | Error::Conditioning(_) | Error::DegenerateVariance(_)
        )
    }
}
