use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: malformed results file: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] pilotcon::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
