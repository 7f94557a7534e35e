use std::fmt;
use std::str::FromStr;

use crate::error::TrainError;
use crate::optim::OptimizerKind;
use crate::vocab::EmbeddingMatrix;

use super::{evaluate, train, LabeledExample, TrainConfig};

pub const LEARNING_RATES: [f64; 5] = [0.001, 0.005, 0.01, 0.05, 0.1];

/// The configuration knob an ablation varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AblationAxis {
    Attention,
    Lr,
    Optimizer,
    Dropout,
    Direction,
}

impl AblationAxis {
    pub const ALL: [AblationAxis; 5] = [
        AblationAxis::Attention,
        AblationAxis::Lr,
        AblationAxis::Optimizer,
        AblationAxis::Dropout,
        AblationAxis::Direction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AblationAxis::Attention => "attention",
            AblationAxis::Lr => "lr",
            AblationAxis::Optimizer => "optimizer",
            AblationAxis::Dropout => "dropout",
            AblationAxis::Direction => "direction",
        }
    }

    /// The grid points of this axis around `base`.
    pub fn grid(self, base: &TrainConfig) -> Vec<GridValue> {
        let with = |label: &str, f: &dyn Fn(&mut TrainConfig)| {
            let mut config = base.clone();
            f(&mut config);
            GridValue {
                label: label.to_string(),
                config,
            }
        };
        let encoder = if base.bidirectional { "BiRNN" } else { "RNN" };
        match self {
            AblationAxis::Attention => vec![
                with(&format!("{encoder} +Attention"), &|c| c.attention = true),
                with(encoder, &|c| c.attention = false),
            ],
            AblationAxis::Lr => LEARNING_RATES
                .iter()
                .map(|&lr| with(&format!("{lr}"), &move |c| c.lr = lr))
                .collect(),
            AblationAxis::Optimizer => vec![
                with("Adam", &|c| c.optimizer = OptimizerKind::Adam),
                with("Gradient descent", &|c| c.optimizer = OptimizerKind::Gd),
            ],
            AblationAxis::Dropout => {
                let rate = if base.dropout > 0.0 { base.dropout } else { 0.5 };
                vec![
                    with("With dropout", &move |c| c.dropout = rate),
                    with("Without dropout", &|c| c.dropout = 0.0),
                ]
            }
            AblationAxis::Direction => vec![
                with("BiRNN", &|c| c.bidirectional = true),
                with("RNN", &|c| c.bidirectional = false),
            ],
        }
    }

    /// Header of the value column in the text table.
    fn metric_header(self) -> &'static str {
        match self {
            AblationAxis::Direction => "F1 Score",
            _ => "Accuracy (%)",
        }
    }

    fn key_header(self) -> &'static str {
        match self {
            AblationAxis::Attention | AblationAxis::Direction => "Model",
            AblationAxis::Lr => "Learning rate",
            AblationAxis::Optimizer => "Optimizer",
            AblationAxis::Dropout => "Dropout",
        }
    }
}

impl FromStr for AblationAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AblationAxis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown axis {s:?} (expected attention, lr, optimizer, dropout or direction)"))
    }
}

impl fmt::Display for AblationAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One labelled configuration of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridValue {
    pub label: String,
    pub config: TrainConfig,
}

/// Seed-averaged results of one grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct AblationPoint {
    pub label: String,
    pub val_accuracy: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    pub train_accuracy: f64,
    /// Validation accuracy of each seed, in seed order.
    pub per_seed_accuracy: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AblationReport {
    pub axis: AblationAxis,
    pub seeds: usize,
    pub points: Vec<AblationPoint>,
}

impl AblationReport {
    pub fn point(&self, label: &str) -> Option<&AblationPoint> {
        self.points.iter().find(|p| p.label == label)
    }

    /// Machine-readable rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("axis,point,seeds,val_accuracy,macro_f1,weighted_f1,train_accuracy\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.axis,
                p.label,
                self.seeds,
                p.val_accuracy,
                p.macro_f1,
                p.weighted_f1,
                p.train_accuracy
            ));
        }
        out
    }
}

impl fmt::Display for AblationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let key = self.axis.key_header();
        let metric = self.axis.metric_header();
        let values: Vec<String> = self
            .points
            .iter()
            .map(|p| match self.axis {
                AblationAxis::Direction => format!("{:.4}", p.macro_f1),
                _ => format!("{:.2}", 100.0 * p.val_accuracy),
            })
            .collect();
        let w0 = self.points.iter().map(|p| p.label.len()).chain([key.len()]).max().unwrap_or(0);
        let w1 = values.iter().map(String::len).chain([metric.len()]).max().unwrap_or(0);
        writeln!(f, "{key:<w0$}  {metric:>w1$}")?;
        writeln!(f, "{}  {}", "-".repeat(w0), "-".repeat(w1))?;
        for (p, v) in self.points.iter().zip(&values) {
            writeln!(f, "{:<w0$}  {v:>w1$}", p.label)?;
        }
        Ok(())
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Trains every grid point once per seed (`seed`, `seed + 1`, ...) and
/// averages the validation metrics.
pub fn run_grid(
    axis: AblationAxis,
    grid: &[GridValue],
    seeds: usize,
    train_set: &[LabeledExample],
    val_set: &[LabeledExample],
    embedding: &EmbeddingMatrix,
) -> Result<AblationReport, TrainError> {
    if seeds == 0 {
        return Err(TrainError::Config("ablation needs at least one seed".into()));
    }
    let mut points = Vec::with_capacity(grid.len());
    for g in grid {
        let (mut acc, mut macro_f1, mut weighted, mut train_acc) = (vec![], vec![], vec![], vec![]);
        for r in 0..seeds {
            let mut config = g.config.clone();
            config.seed = g.config.seed.wrapping_add(r as u64);
            let outcome = train(&config, train_set, val_set, embedding)?;
            acc.push(outcome.report.accuracy);
            macro_f1.push(outcome.report.macro_f1);
            weighted.push(outcome.report.weighted_f1);
            train_acc.push(evaluate(&outcome.params, train_set)?.accuracy);
        }
        points.push(AblationPoint {
            label: g.label.clone(),
            val_accuracy: mean(&acc),
            macro_f1: mean(&macro_f1),
            weighted_f1: mean(&weighted),
            train_accuracy: mean(&train_acc),
            per_seed_accuracy: acc,
        });
    }
    Ok(AblationReport {
        axis,
        seeds,
        points,
    })
}

/// Runs the standard grid of `axis` around `base`.
pub fn ablation_run(
    base: &TrainConfig,
    axis: AblationAxis,
    seeds: usize,
    train_set: &[LabeledExample],
    val_set: &[LabeledExample],
    embedding: &EmbeddingMatrix,
) -> Result<AblationReport, TrainError> {
    run_grid(axis, &axis.grid(base), seeds, train_set, val_set, embedding)
}
