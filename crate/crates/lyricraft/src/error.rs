use std::path::PathBuf;

use lyricraft_core::corpus::CorpusError;
use lyricraft_core::dataset::DatasetError;
use lyricraft_core::generation::GenerationError;
use lyricraft_core::metrics::EvaluationError;
use lyricraft_core::ngram::NgramError;
use lyricraft_core::phonetics::PhoneticsError;
use lyricraft_core::rhyme::RhymeError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: record {record}: {message}")]
    Parse { path: PathBuf, record: usize, message: String },
    #[error("{path}: row {row}: {source}")]
    MalformedRow {
        path: PathBuf,
        row: usize,
        #[source]
        source: DatasetError,
    },
    #[error("{path}: corpus is empty")]
    EmptyCorpus { path: PathBuf },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Phonetics(#[from] PhoneticsError),
    #[error(transparent)]
    Rhyme(#[from] RhymeError),
    #[error(transparent)]
    Ngram(#[from] NgramError),
    #[error(transparent)]
    Generation(#[from] GenerationError),
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
    #[error("{0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True when the failure came from a generation backend.
    pub fn is_backend(&self) -> bool {
        let backend = |e: &GenerationError| {
            matches!(e, GenerationError::BackendUnavailable(_) | GenerationError::MalformedResponse(_))
        };
        match self {
            Error::Generation(e) => backend(e),
            Error::Evaluation(e) => backend(&e.source),
            _ => false,
        }
    }
}
