use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("{path}: row {row}: label {value:?} is not one of the declared classes")]
    Label {
        path: PathBuf,
        row: usize,
        value: String,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("split error: {0}")]
    Split(String),

    #[error("fold error: {0}")]
    Fold(String),

    #[error("imbalance error: {0}")]
    Imbalance(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("contract error: {0}")]
    Contract(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line driver: 3 for configuration
    /// problems, 2 for everything rooted in the input data.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Split(_) | Error::Fold(_) => 3,
            _ => 2,
        }
    }
}
