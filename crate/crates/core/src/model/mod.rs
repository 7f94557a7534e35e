//! Bidirectional LSTM encoder with additive attention pooling and a
//! four-class softmax head. Forward and backward passes are written by hand.

mod backward;
mod forward;
mod gradcheck;
mod params;
mod predict;

use std::fmt;
use std::str::FromStr;

pub use backward::{backward, backward_acc};
pub use forward::{attention_pool, bilstm_encode, classify, forward_loss, lstm_cell, ForwardTrace, LstmStep};
pub use gradcheck::{gradient_check, tiny_dims, GradCheckReport};
pub use params::{
    AttentionWeights, Gradients, LstmWeights, ModelDims, ModelParams, OutputWeights,
    DEFAULT_ATTENTION, DEFAULT_HIDDEN, FORGET_BIAS,
};
pub use predict::{argmax, Classifier, PredictError, Prediction};

pub const NUM_CLASSES: usize = 4;

/// Output classes, in the fixed order of the classifier head.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    Normal = 0,
    Spam = 1,
    Hateful = 2,
    Abusive = 3,
}

impl Class {
    pub const ALL: [Class; NUM_CLASSES] = [Class::Normal, Class::Spam, Class::Hateful, Class::Abusive];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Class> {
        Class::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Class::Normal => "normal",
            Class::Spam => "spam",
            Class::Hateful => "hateful",
            Class::Abusive => "abusive",
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown label {0:?} (expected normal, spam, hateful or abusive)")]
pub struct UnknownLabel(pub String);

impl FromStr for Class {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Class::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

#[cfg(test)]
mod tests;
