use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The CSIT matrix handed to the beamformer is numerically singular.
    #[error("singular channel matrix (condition number {cond:.3e})")]
    SingularChannel { cond: f64 },

    #[error("snapshot {snapshot}: gave up after {redraws} singular-channel redraws")]
    RedrawLimit { snapshot: usize, redraws: usize },

    /// Scenario schema violation. `key` is the dotted path of the offending entry.
    #[error("scenario key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("scenario parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
