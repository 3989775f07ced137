use thiserror::Error;

/// Crate-wide error type. Variants separate bad configuration (caller can
/// fix the inputs) from ingestion, training, and analysis failures (the data
/// or the run itself is at fault).
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("ingestion error in {path}: {message}")]
    Ingestion { path: String, message: String },

    #[error("encoding error: {0}")]
    Encode(String),

    #[error("training failure: {0}")]
    Training(String),

    #[error("environment pack error: {0}")]
    Pack(String),

    #[error("analysis error: {0}")]
    Analysis(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("run failure: {0}")]
    Run(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("toml parse error: {0}")]
    TomlDe(#[from] toml::de::Error),

    #[error("toml write error: {0}")]
    TomlSer(#[from] toml::ser::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn ingestion(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Ingestion {
            path: path.into(),
            message: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
