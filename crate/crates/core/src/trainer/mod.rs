//! Dataset splitting, the mini-batch training loop, evaluation and the
//! ablation harness.

mod ablation;
mod metrics;

use std::ops::ControlFlow;

pub use ablation::{ablation_run, run_grid, AblationAxis, AblationPoint, AblationReport, GridValue, LEARNING_RATES};
pub use metrics::{ClassMetrics, ConfusionMatrix, EvaluationReport};

use crate::error::TrainError;
use crate::model::{
    argmax, backward_acc, forward_loss, Class, Gradients, ModelDims, ModelParams, DEFAULT_ATTENTION,
    DEFAULT_HIDDEN,
};
use crate::numcore::RngStream;
use crate::optim::{adam_step, sgd_step, AdamState, OptimizerKind};
use crate::vocab::{EmbeddingMatrix, EncodedSequence};

pub const DEFAULT_MAX_LEN: usize = 50;
pub const DEFAULT_EMBED_DIM: usize = 300;

// Tags for the independent random streams drawn from the seed.
const STREAM_INIT: u64 = 1;
const STREAM_SHUFFLE: u64 = 2;
const STREAM_DROPOUT: u64 = 3;
const STREAM_SPLIT: u64 = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub optimizer: OptimizerKind,
    pub attention: bool,
    pub dropout: f64,
    pub bidirectional: bool,
    pub seed: u64,
    pub max_len: usize,
    pub hidden: usize,
    pub attn: usize,
    pub min_count: usize,
    pub embed_dim: usize,
    /// Leave the embedding table untouched during training.
    pub freeze_embeddings: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 0.01,
            batch_size: 64,
            epochs: 200,
            optimizer: OptimizerKind::Adam,
            attention: true,
            dropout: 0.5,
            bidirectional: true,
            seed: 0,
            max_len: DEFAULT_MAX_LEN,
            hidden: DEFAULT_HIDDEN,
            attn: DEFAULT_ATTENTION,
            min_count: 1,
            embed_dim: DEFAULT_EMBED_DIM,
            freeze_embeddings: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |msg: String| Err(TrainError::Config(msg));
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("lr must be positive, got {}", self.lr));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout must lie in [0, 1), got {}", self.dropout));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if self.max_len == 0 {
            return bad("max_len must be at least 1".into());
        }
        if self.hidden == 0 || self.embed_dim == 0 || (self.attention && self.attn == 0) {
            return bad("layer sizes must be positive".into());
        }
        if self.min_count == 0 {
            return bad("min_count must be at least 1".into());
        }
        Ok(())
    }

    pub fn dims(&self, vocab: usize) -> ModelDims {
        ModelDims {
            vocab,
            embed: self.embed_dim,
            hidden: self.hidden,
            attn: self.attn,
            bidirectional: self.bidirectional,
            attention: self.attention,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledExample {
    pub seq: EncodedSequence,
    pub label: Class,
}

pub type Dataset = Vec<LabeledExample>;

/// Splits `items` into train, validation and test parts, class by class.
/// Each class contributes `round(n * train_frac)` items to train and
/// `round(n * val_frac)` (capped by what is left) to validation; the rest
/// goes to test. Within each part items are shuffled.
pub fn stratified_split<T: Clone>(
    items: &[T],
    label: impl Fn(&T) -> Class,
    train_frac: f64,
    val_frac: f64,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>, Vec<T>), TrainError> {
    if !(train_frac > 0.0 && val_frac > 0.0 && train_frac + val_frac < 1.0) {
        return Err(TrainError::Config(format!(
            "split fractions must be positive with train + val < 1, got {train_frac} and {val_frac}"
        )));
    }
    let mut rng = RngStream::new(seed).derive(STREAM_SPLIT);
    let (mut train, mut val, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for class in Class::ALL {
        let mut idx: Vec<usize> = (0..items.len()).filter(|&i| label(&items[i]) == class).collect();
        let n = idx.len();
        rng.shuffle(&mut idx);
        let n_train = ((n as f64 * train_frac).round() as usize).min(n);
        let n_val = ((n as f64 * val_frac).round() as usize).min(n - n_train);
        if n >= 3 {
            for (count, split) in [(n_train, "train"), (n_val, "validation")] {
                if count == 0 {
                    return Err(TrainError::Stratification {
                        class: class.name(),
                        total: n,
                        split,
                    });
                }
            }
        }
        train.extend(idx[..n_train].iter().map(|&i| items[i].clone()));
        val.extend(idx[n_train..n_train + n_val].iter().map(|&i| items[i].clone()));
        test.extend(idx[n_train + n_val..].iter().map(|&i| items[i].clone()));
    }
    rng.shuffle(&mut train);
    rng.shuffle(&mut val);
    rng.shuffle(&mut test);
    Ok((train, val, test))
}

/// The log line for one optimizer step.
pub fn format_step(step: usize, loss: f64) -> String {
    format!("step {step}: loss = {loss:?}")
}

/// Progress notifications from [`train_with`].
#[derive(Clone, Debug)]
pub enum TrainEvent<'a> {
    Step { step: usize, loss: f64 },
    Epoch {
        epoch: usize,
        params: &'a ModelParams,
        report: &'a EvaluationReport,
    },
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: ModelParams,
    /// Mean batch loss per optimizer step, steps numbered from 1.
    pub history: Vec<(usize, f64)>,
    /// Validation report after the last epoch.
    pub report: EvaluationReport,
    /// Validation report after each completed epoch.
    pub epoch_reports: Vec<EvaluationReport>,
}

impl TrainOutcome {
    /// Step lines followed by the final validation summary.
    pub fn log(&self) -> String {
        let mut out = String::new();
        for &(step, loss) in &self.history {
            out.push_str(&format_step(step, loss));
            out.push('\n');
        }
        out.push_str(&format!("Validation Accuracy = {:?}\n", self.report.accuracy));
        out.push_str(&format!("F1 Score = {:?}\n", self.report.weighted_f1));
        out
    }
}

/// Fresh parameters for `config` around the given embedding table.
pub fn init_params(config: &TrainConfig, embedding: &EmbeddingMatrix) -> Result<ModelParams, TrainError> {
    config.validate()?;
    if embedding.dim() != config.embed_dim {
        return Err(TrainError::Config(format!(
            "embedding dimension {} does not match embed_dim {}",
            embedding.dim(),
            config.embed_dim
        )));
    }
    let dims = config.dims(embedding.rows());
    let seed = RngStream::new(config.seed).derive(STREAM_INIT).next_u64();
    Ok(ModelParams::init(dims, embedding.matrix.clone(), seed)?)
}

pub fn train(
    config: &TrainConfig,
    train: &[LabeledExample],
    val: &[LabeledExample],
    embedding: &EmbeddingMatrix,
) -> Result<TrainOutcome, TrainError> {
    train_with(config, train, val, embedding, |_| ControlFlow::Continue(()))
}

/// Like [`train`], reporting each step and epoch to `observer`. Breaking from
/// the observer ends training after the current step or epoch.
pub fn train_with<F>(
    config: &TrainConfig,
    train: &[LabeledExample],
    val: &[LabeledExample],
    embedding: &EmbeddingMatrix,
    mut observer: F,
) -> Result<TrainOutcome, TrainError>
where
    F: FnMut(TrainEvent<'_>) -> ControlFlow<()>,
{
    if train.is_empty() {
        return Err(TrainError::EmptyTrainingSet);
    }
    if val.is_empty() {
        return Err(TrainError::EmptyEvaluationSet);
    }
    let mut params = init_params(config, embedding)?;
    let root = RngStream::new(config.seed);
    let mut shuffle_rng = root.derive(STREAM_SHUFFLE);
    let mut dropout_rng = root.derive(STREAM_DROPOUT);
    let mut adam = AdamState::new(&params);
    let mut grads = Gradients::zeros_like(&params);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = Vec::new();
    let mut epoch_reports = Vec::new();
    let mut step = 0;

    'epochs: for epoch in 1..=config.epochs {
        shuffle_rng.shuffle(&mut order);
        for batch in order.chunks(config.batch_size) {
            step += 1;
            grads.clear();
            let mut loss_sum = 0.0;
            for &i in batch {
                let ex = &train[i];
                let label = ex.label.index();
                let (loss, trace) = forward_loss(&ex.seq, label, &params, config.dropout, &mut dropout_rng, true)?;
                loss_sum += loss;
                backward_acc(&trace, &ex.seq, label, &params, &mut grads)?;
            }
            let loss = loss_sum / batch.len() as f64;
            if !loss.is_finite() {
                return Err(TrainError::Diverged { step, loss });
            }
            grads.scale(1.0 / batch.len() as f64);
            if config.freeze_embeddings {
                grads.embedding.fill(0.0);
            }
            match config.optimizer {
                OptimizerKind::Adam => adam_step(&mut params, &grads, &mut adam, config.lr)?,
                OptimizerKind::Gd => sgd_step(&mut params, &grads, config.lr)?,
            };
            if !params.is_finite() {
                return Err(TrainError::Diverged { step, loss: f64::NAN });
            }
            history.push((step, loss));
            if observer(TrainEvent::Step { step, loss }).is_break() {
                epoch_reports.push(evaluate(&params, val)?);
                break 'epochs;
            }
        }
        let report = evaluate(&params, val)?;
        let flow = observer(TrainEvent::Epoch {
            epoch,
            params: &params,
            report: &report,
        });
        epoch_reports.push(report);
        if flow.is_break() {
            break;
        }
    }

    let report = match epoch_reports.last() {
        Some(r) => r.clone(),
        None => evaluate(&params, val)?,
    };
    Ok(TrainOutcome {
        params,
        history,
        report,
        epoch_reports,
    })
}

/// Confusion matrix, metrics and mean cross-entropy of `params` on `data`.
pub fn evaluate(params: &ModelParams, data: &[LabeledExample]) -> Result<EvaluationReport, TrainError> {
    if data.is_empty() {
        return Err(TrainError::EmptyEvaluationSet);
    }
    let mut cm = ConfusionMatrix::default();
    let mut loss_sum = 0.0;
    let mut rng = RngStream::new(0);
    for ex in data {
        let (loss, trace) = forward_loss(&ex.seq, ex.label.index(), params, 0.0, &mut rng, false)?;
        loss_sum += loss;
        cm.record(ex.label, Class::from_index(argmax(&trace.probs)).expect("four classes"));
    }
    Ok(EvaluationReport::from_confusion(cm, loss_sum / data.len() as f64))
}

#[cfg(test)]
mod tests;
