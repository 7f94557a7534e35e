use std::ops::{Deref, DerefMut};

use crate::error::NumError;
use crate::numcore::{Matrix, RngStream};
use crate::vocab::PAD_ID;

use super::NUM_CLASSES;

/// Default hidden size per direction.
pub const DEFAULT_HIDDEN: usize = 128;
/// Default attention projection size.
pub const DEFAULT_ATTENTION: usize = 64;
/// Initial forget-gate bias.
pub const FORGET_BIAS: f64 = 1.0;

/// Shape parameters of a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelDims {
    pub vocab: usize,
    pub embed: usize,
    pub hidden: usize,
    pub attn: usize,
    pub bidirectional: bool,
    /// Attention pooling on; when off the context is the final state of each
    /// direction.
    pub attention: bool,
}

impl ModelDims {
    /// Width of the per-position encoder state and of the pooled context.
    pub fn context(&self) -> usize {
        if self.bidirectional {
            2 * self.hidden
        } else {
            self.hidden
        }
    }
}

/// One LSTM direction. Rows of `w`, `u` and `b` are stacked in gate order
/// `[input, forget, cell, output]`, `hidden` rows per gate.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmWeights {
    /// `4h x d` input weights.
    pub w: Matrix,
    /// `4h x h` recurrent weights.
    pub u: Matrix,
    /// `1 x 4h` bias.
    pub b: Matrix,
}

impl LstmWeights {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        LstmWeights {
            w: Matrix::zeros(4 * hidden, input),
            u: Matrix::zeros(4 * hidden, hidden),
            b: Matrix::zeros(1, 4 * hidden),
        }
    }

    pub fn hidden(&self) -> usize {
        self.u.cols()
    }

    pub fn input(&self) -> usize {
        self.w.cols()
    }

    fn init(input: usize, hidden: usize, rng: &mut RngStream) -> Self {
        let mut l = LstmWeights::zeros(input, hidden);
        fill_uniform(&mut l.w, 1.0 / (input as f64).sqrt(), rng);
        fill_uniform(&mut l.u, 1.0 / (hidden as f64).sqrt(), rng);
        l.b.as_mut_slice()[hidden..2 * hidden].fill(FORGET_BIAS);
        l
    }
}

/// Additive attention: `score_t = v · tanh(W H_t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionWeights {
    /// `a x context`.
    pub w: Matrix,
    /// `1 x a`.
    pub v: Matrix,
}

/// Softmax classifier head.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputWeights {
    /// `4 x context`.
    pub w: Matrix,
    /// `1 x 4`.
    pub b: Matrix,
}

/// Every trainable tensor of the classifier.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub dims: ModelDims,
    /// `V x d`; row [`PAD_ID`] stays zero.
    pub embedding: Matrix,
    pub fwd: LstmWeights,
    /// Present only in bidirectional models.
    pub bwd: Option<LstmWeights>,
    pub attn: AttentionWeights,
    pub out: OutputWeights,
}

fn fill_uniform(m: &mut Matrix, bound: f64, rng: &mut RngStream) {
    for v in m.as_mut_slice() {
        *v = rng.uniform(-bound, bound);
    }
}

impl ModelParams {
    pub fn zeros(dims: ModelDims) -> Self {
        let ctx = dims.context();
        ModelParams {
            dims,
            embedding: Matrix::zeros(dims.vocab, dims.embed),
            fwd: LstmWeights::zeros(dims.embed, dims.hidden),
            bwd: dims
                .bidirectional
                .then(|| LstmWeights::zeros(dims.embed, dims.hidden)),
            attn: AttentionWeights {
                w: Matrix::zeros(dims.attn, ctx),
                v: Matrix::zeros(1, dims.attn),
            },
            out: OutputWeights {
                w: Matrix::zeros(NUM_CLASSES, ctx),
                b: Matrix::zeros(1, NUM_CLASSES),
            },
        }
    }

    /// Uniform `±1/√fan_in` weights, zero biases except the forget gate
    /// (1.0), and the given embedding table.
    pub fn init(dims: ModelDims, embedding: Matrix, seed: u64) -> Result<Self, NumError> {
        if embedding.shape() != (dims.vocab, dims.embed) {
            return Err(NumError::dims(
                "ModelParams::init embedding",
                format!("{}x{}", dims.vocab, dims.embed),
                format!("{}x{}", embedding.rows(), embedding.cols()),
            ));
        }
        let mut rng = RngStream::new(seed);
        let ctx = dims.context();
        let fwd = LstmWeights::init(dims.embed, dims.hidden, &mut rng);
        let bwd = dims
            .bidirectional
            .then(|| LstmWeights::init(dims.embed, dims.hidden, &mut rng));
        let mut attn = AttentionWeights {
            w: Matrix::zeros(dims.attn, ctx),
            v: Matrix::zeros(1, dims.attn),
        };
        fill_uniform(&mut attn.w, 1.0 / (ctx as f64).sqrt(), &mut rng);
        fill_uniform(&mut attn.v, 1.0 / (dims.attn.max(1) as f64).sqrt(), &mut rng);
        let mut out = OutputWeights {
            w: Matrix::zeros(NUM_CLASSES, ctx),
            b: Matrix::zeros(1, NUM_CLASSES),
        };
        fill_uniform(&mut out.w, 1.0 / (ctx as f64).sqrt(), &mut rng);
        let mut embedding = embedding;
        if dims.vocab > PAD_ID {
            embedding.row_mut(PAD_ID).fill(0.0);
        }
        Ok(ModelParams {
            dims,
            embedding,
            fwd,
            bwd,
            attn,
            out,
        })
    }

    /// Named tensors in a fixed order.
    pub fn tensors(&self) -> Vec<(&'static str, &Matrix)> {
        let mut v = vec![
            ("embedding", &self.embedding),
            ("fwd.W", &self.fwd.w),
            ("fwd.U", &self.fwd.u),
            ("fwd.b", &self.fwd.b),
        ];
        if let Some(b) = &self.bwd {
            v.extend([("bwd.W", &b.w), ("bwd.U", &b.u), ("bwd.b", &b.b)]);
        }
        v.extend([
            ("attn.W", &self.attn.w),
            ("attn.v", &self.attn.v),
            ("out.W", &self.out.w),
            ("out.b", &self.out.b),
        ]);
        v
    }

    /// Mutable counterpart of [`ModelParams::tensors`], same order.
    pub fn tensors_mut(&mut self) -> Vec<(&'static str, &mut Matrix)> {
        let mut v = vec![
            ("embedding", &mut self.embedding),
            ("fwd.W", &mut self.fwd.w),
            ("fwd.U", &mut self.fwd.u),
            ("fwd.b", &mut self.fwd.b),
        ];
        if let Some(b) = &mut self.bwd {
            v.extend([("bwd.W", &mut b.w), ("bwd.U", &mut b.u), ("bwd.b", &mut b.b)]);
        }
        v.extend([
            ("attn.W", &mut self.attn.w),
            ("attn.v", &mut self.attn.v),
            ("out.W", &mut self.out.w),
            ("out.b", &mut self.out.b),
        ]);
        v
    }

    pub fn tensor_count(&self) -> usize {
        if self.bwd.is_some() {
            11
        } else {
            8
        }
    }

    pub fn num_values(&self) -> usize {
        self.tensors().iter().map(|(_, m)| m.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, m)| m.is_finite())
    }

    /// All values concatenated in tensor order.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_values());
        for (_, m) in self.tensors() {
            out.extend_from_slice(m.as_slice());
        }
        out
    }

    /// Overwrites all values from a flat vector produced by [`ModelParams::to_flat`].
    pub fn set_flat(&mut self, flat: &[f64]) -> Result<(), NumError> {
        if flat.len() != self.num_values() {
            return Err(NumError::dims("ModelParams::set_flat", self.num_values(), flat.len()));
        }
        let mut offset = 0;
        for (_, m) in self.tensors_mut() {
            let n = m.len();
            m.as_mut_slice().copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    /// Checks that every tensor has the shape implied by `dims`.
    pub fn validate(&self) -> Result<(), NumError> {
        let expected = ModelParams::zeros(self.dims);
        let want = expected.tensors();
        let have = self.tensors();
        if want.len() != have.len() {
            return Err(NumError::dims("ModelParams tensors", want.len(), have.len()));
        }
        for ((name, w), (_, h)) in want.iter().zip(&have) {
            if w.shape() != h.shape() {
                return Err(NumError::dims(
                    name,
                    format!("{}x{}", w.rows(), w.cols()),
                    format!("{}x{}", h.rows(), h.cols()),
                ));
            }
        }
        Ok(())
    }
}

/// Gradient of the loss with respect to every [`ModelParams`] tensor; same
/// shapes and tensor order as the parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients(ModelParams);

impl Gradients {
    pub fn zeros_like(params: &ModelParams) -> Self {
        Gradients(ModelParams::zeros(params.dims))
    }

    pub fn clear(&mut self) {
        for (_, m) in self.0.tensors_mut() {
            m.fill(0.0);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for (_, m) in self.0.tensors_mut() {
            m.as_mut_slice().iter_mut().for_each(|v| *v *= factor);
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) -> Result<(), NumError> {
        if self.0.dims != other.0.dims {
            return Err(NumError::dims("Gradients::add_assign", "matching dims", "different dims"));
        }
        for ((_, a), (_, b)) in self.0.tensors_mut().into_iter().zip(other.0.tensors()) {
            for (x, y) in a.as_mut_slice().iter_mut().zip(b.as_slice()) {
                *x += y;
            }
        }
        Ok(())
    }
}

impl Deref for Gradients {
    type Target = ModelParams;

    fn deref(&self) -> &ModelParams {
        &self.0
    }
}

impl DerefMut for Gradients {
    fn deref_mut(&mut self) -> &mut ModelParams {
        &mut self.0
    }
}
