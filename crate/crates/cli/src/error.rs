use std::path::PathBuf;

use evoset_core::error::EvolutionError;
use evoset_core::genealogy::GenealogyError;
use evoset_core::intervals::IntervalError;
use evoset_core::measure::MeasureError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// `pointer` is a JSON pointer into the model document.
    #[error("schema error at {pointer}: {reason}")]
    Schema { pointer: String, reason: String },
    #[error("unknown model kind `{0}`")]
    UnknownKind(String),
    #[error("no model file or built-in named `{0}`")]
    ModelNotFound(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("model `{kind}` does not support `{command}`")]
    Unsupported { kind: String, command: &'static str },
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error(transparent)]
    Genealogy(#[from] GenealogyError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    pub fn schema(pointer: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Schema {
            pointer: pointer.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
