use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Bad magic, version, or header in a binary artifact.
    #[error("format error: {0}")]
    Format(String),

    /// Payload length disagrees with the declared shape.
    #[error("size error: {0}")]
    Size(String),

    /// Content violates a data invariant (non-finite value, bad index, ...).
    #[error("data error: {0}")]
    Data(String),

    /// Caller passed an argument outside an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Config file problem (unknown key, unparsable value).
    #[error("config error: {0}")]
    Config(String),

    /// Feature curation left nothing to train on.
    #[error("curation error: {0}")]
    Curation(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("inference error: {0}")]
    Inference(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
