use thiserror::Error;

use crate::error::NumError;
use crate::numcore::RngStream;
use crate::preprocess::{run_pipeline, RawText, UnigramTable};
use crate::vocab::Vocabulary;

use super::forward::forward_loss;
use super::{Class, ModelParams};

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("text {0:?} has no tokens after preprocessing")]
    EmptyInput(String),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub class: Class,
    pub probs: Vec<f64>,
    /// Tokens the model saw, after preprocessing and truncation.
    pub tokens: Vec<String>,
    /// One attention weight per entry of `tokens`; empty for models without
    /// attention pooling.
    pub attention: Vec<f64>,
}

/// Trained artifacts bundled for inference.
#[derive(Clone, Debug)]
pub struct Classifier {
    pub params: ModelParams,
    pub vocab: Vocabulary,
    pub table: UnigramTable,
    pub max_len: usize,
}

impl Classifier {
    pub fn predict(&self, raw: &RawText) -> Result<Prediction, PredictError> {
        let tokens = run_pipeline(raw, &self.table);
        if tokens.is_empty() {
            return Err(PredictError::EmptyInput(raw.text.clone()));
        }
        let seq = self.vocab.encode(&tokens, self.max_len);
        // Label is irrelevant without training; the loss is discarded.
        let mut rng = RngStream::new(0);
        let (_, trace) = forward_loss(&seq, 0, &self.params, 0.0, &mut rng, false)?;
        let n = seq.true_length();
        let attention = if trace.weights.is_empty() {
            Vec::new()
        } else {
            trace.weights[..n].to_vec()
        };
        Ok(Prediction {
            class: Class::from_index(argmax(&trace.probs)).expect("four probabilities"),
            probs: trace.probs,
            tokens: tokens.tokens()[..n].to_vec(),
            attention,
        })
    }

    pub fn predict_text(&self, text: &str) -> Result<Prediction, PredictError> {
        self.predict(&RawText::new(text, "input"))
    }
}
