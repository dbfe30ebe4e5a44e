use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing required field `{0}`")]
    MissingField(String),

    #[error("label value outside annotation scale: {field}={value}")]
    LabelOutOfScale { field: &'static str, value: f64 },

    #[error("malformed input at {location}: {reason}")]
    Parse { location: String, reason: String },

    #[error("empty document")]
    EmptyDocument,

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("class {class} has {count} member(s); at least 2 are required")]
    ClassTooSmall { class: usize, count: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("target class {target} out of range for {n_classes} classes")]
    TargetOutOfRange { target: usize, n_classes: usize },

    #[error("training diverged at epoch {epoch}, batch {batch}: loss is {loss}")]
    Diverged { epoch: usize, batch: usize, loss: f64 },

    #[error("no admissible token")]
    NoAdmissibleToken,

    #[error("empty pool for class {class} ({filter})")]
    EmptyPool { class: usize, filter: String },

    #[error("empty admissible set for attack {0}")]
    EmptyAdmissibleSet(String),

    #[error("phrase `{0}` has no in-vocabulary words")]
    OutOfVocabularyPhrase(String),

    #[error("class `{0}` is empty")]
    EmptyClass(String),

    #[error("checkpoint vocabulary hash mismatch: checkpoint has {expected}, vocabulary hashes to {found}")]
    VocabHashMismatch { expected: String, found: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path)
        } else {
            Error::Io { path, source }
        }
    }

    pub(crate) fn parse(location: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            reason: reason.into(),
        }
    }
}
