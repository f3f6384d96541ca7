use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Schema or value error in a config file, with its 1-based line.
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("report format error: {0}")]
    Format(String),

    #[error(transparent)]
    Core(#[from] kakeya_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("yaml error: {0}")]
    Yaml(#[from] serde_yaml::Error),

    #[error("thread pool: {0}")]
    Threads(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T> = std::result::Result<T, CliError>;
