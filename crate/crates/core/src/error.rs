use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Stream(#[from] std::io::Error),

    #[error("grammar {location}: {message}")]
    Grammar { location: String, message: String },

    #[error("contrast rule in {location} produced an identical sentence: {sentence}")]
    IdenticalContrast { location: String, sentence: String },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ARPA line {line}: {message}")]
    Arpa { line: usize, message: String },

    #[error("line {line}: {message}")]
    Json { line: usize, message: String },

    #[error("score record {sentence_id}: {message}")]
    ScoreRecord { sentence_id: String, message: String },

    #[error("judge: {0}")]
    Judge(String),
}

impl Error {
    pub(crate) fn grammar(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Grammar {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
