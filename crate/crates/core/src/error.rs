use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure reported by an HTTP fetch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FetchStatus {
    /// Server answered with a non-2xx status.
    Http(u16),
    Timeout,
    /// Connection-level failure (DNS, refused, reset, ...).
    Network(String),
    InvalidUrl,
}

impl std::fmt::Display for FetchStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FetchStatus::Http(code) => write!(f, "HTTP {code}"),
            FetchStatus::Timeout => f.write_str("timeout"),
            FetchStatus::Network(msg) => write!(f, "network error: {msg}"),
            FetchStatus::InvalidUrl => f.write_str("invalid url"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("fetching {url} failed: {status}")]
    Fetch { url: String, status: FetchStatus },

    #[error("article {id} has no extractable paragraph text")]
    EmptyBody { id: String },

    #[error("value {value} outside of allowed range {range}")]
    Range { value: f64, range: &'static str },

    #[error("malformed input: {0}")]
    Format(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("NER provider {provider} failed: {message}")]
    Provider { provider: String, message: String },

    #[error("no cached embedding for span key {key}")]
    MissingEmbedding { key: String },

    #[error("cannot embed empty text")]
    EmptyText,

    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("statistic is undefined: {0}")]
    Degenerate(String),

    #[error("report cell {metric}/{approach} has no data")]
    Incomplete { metric: String, approach: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
