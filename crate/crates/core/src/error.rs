use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the numerical kernel and the model.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumError {
    #[error("dimension mismatch in {op}: expected {expected}, got {actual}")]
    Dimension {
        op: &'static str,
        expected: String,
        actual: String,
    },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dropout rate must lie in [0, 1), got {0}")]
    DropoutRate(f64),
    #[error("finite-difference step must be positive, got {0}")]
    FiniteDiffStep(f64),
    #[error("objective returned a non-finite value at coordinate {0}")]
    NonFinite(usize),
    #[error("attention needs at least one non-pad position")]
    EmptySequence,
}

impl NumError {
    pub(crate) fn dims(op: &'static str, expected: impl ToString, actual: impl ToString) -> Self {
        NumError::Dimension {
            op,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("cannot read embedding file {path}: {source}")]
    Load {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("embedding file {0} contains no valid vectors")]
    Empty(PathBuf),
    #[error("embedding dimension mismatch: vectors have {found}, matrix expects {expected}")]
    Dimension { expected: usize, found: usize },
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("cannot evaluate an empty dataset")]
    EmptyEvaluationSet,
    #[error("loss diverged at step {step} (loss = {loss})")]
    Diverged { step: usize, loss: f64 },
    #[error("class {class} has {total} examples but none in the {split} split")]
    Stratification {
        class: &'static str,
        total: usize,
        split: &'static str,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Num(#[from] NumError),
}
