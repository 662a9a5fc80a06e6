use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse error category, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numeric,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("{failed} of {total} lines are malformed (first: line {first_line}: {first_message})")]
    TooManyMalformed {
        failed: usize,
        total: usize,
        first_line: usize,
        first_message: String,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("labels contain a single class; both Buy and Sell are required")]
    SingleClass,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected} columns, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("unknown stock feature `{0}`")]
    UnknownFeature(String),

    #[error("model `{0}` exposes no per-feature weight vector")]
    UnsupportedModel(String),

    #[error("optimizer did not converge after {iterations} iterations (gradient inf-norm {grad_norm:.3e})")]
    NotConverged { iterations: usize, grad_norm: f64 },

    #[error("differential return series has zero standard deviation")]
    UndefinedRisk,

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("lexicon: {0}")]
    Lexicon(String),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io(_) => ErrorKind::Io,
            Error::Config(_) | Error::UnknownFeature(_) | Error::UnsupportedModel(_) => {
                ErrorKind::Config
            }
            Error::NotConverged { .. } | Error::UndefinedRisk | Error::InvalidArgument(_) => {
                ErrorKind::Numeric
            }
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn row(row: usize, message: impl Into<String>) -> Self {
        Error::Row {
            row,
            message: message.into(),
        }
    }
}
