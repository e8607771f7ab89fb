//! Error type shared by every pipeline stage.

use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("missing required column `{0}`")]
    Schema(String),

    #[error("empty corpus: {0}")]
    DegenerateCorpus(String),

    #[error("degenerate features: {0}")]
    DegenerateFeatures(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("class `{class}` has {count} documents, fewer than k={k} folds")]
    Stratification { class: String, count: usize, k: usize },

    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },

    #[error("vocabulary mismatch: {0}")]
    VocabMismatch(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// Stable, greppable code printed in front of CLI error messages.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "E_IO",
            Error::Csv(_) => "E_CSV",
            Error::Schema(_) => "E_SCHEMA",
            Error::DegenerateCorpus(_) => "E_EMPTY_CORPUS",
            Error::DegenerateFeatures(_) => "E_DEGENERATE_FEATURES",
            Error::Contract(_) => "E_CONTRACT",
            Error::Stratification { .. } => "E_STRATIFICATION",
            Error::Format { .. } => "E_FORMAT",
            Error::VocabMismatch(_) => "E_VOCAB_MISMATCH",
        }
    }
}
