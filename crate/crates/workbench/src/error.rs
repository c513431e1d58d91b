use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown page {0:?}")]
    UnknownPage(String),
    #[error("page {page:?} has no generated output for strategy {strategy}")]
    UnknownGenerated { page: String, strategy: String },
    #[error("{0:?} is not a valid page id")]
    InvalidId(String),
    #[error("missing file {0}")]
    Missing(PathBuf),
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Core(#[from] mrweb_core::Error),
    #[error(transparent)]
    Gen(#[from] mrweb_gen::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// True when the error means a requested page or artifact does not exist.
    pub fn is_not_found(&self) -> bool {
        match self {
            Error::UnknownPage(_) | Error::UnknownGenerated { .. } | Error::InvalidId(_) | Error::Missing(_) => true,
            Error::File { source, .. } => source.is_not_found(),
            _ => false,
        }
    }
}
