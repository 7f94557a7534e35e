//! Abusive language detection for short social-media posts.
//!
//! Posts are cleaned by [`preprocess`], encoded against a [`vocab`] backed by
//! GloVe vectors, and classified into four classes by a bidirectional LSTM
//! with attention pooling ([`model`]) trained from scratch ([`trainer`],
//! [`optim`]).

pub mod error;
pub mod numcore;
pub mod preprocess;
pub mod vocab;
pub mod model;
pub mod optim;
pub mod trainer;
pub mod cli;
pub mod synth;
