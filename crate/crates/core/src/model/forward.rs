use crate::error::NumError;
use crate::numcore::{cross_entropy, dot, dropout_mask, sigmoid, softmax, softmax_in_place, Matrix, RngStream};
use crate::vocab::EncodedSequence;

use super::params::{LstmWeights, ModelDims, ModelParams};
use super::NUM_CLASSES;

/// Activations of one LSTM step.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmStep {
    /// Post-activation gates `[i, f, g, o]`, `4h` values.
    pub gates: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

fn step(x: &[f64], h_prev: &[f64], c_prev: &[f64], w: &LstmWeights) -> LstmStep {
    let h = w.hidden();
    let mut gates = w.b.as_slice().to_vec();
    w.w.matvec_acc(x, &mut gates);
    w.u.matvec_acc(h_prev, &mut gates);
    for (k, z) in gates.iter_mut().enumerate() {
        *z = if (2 * h..3 * h).contains(&k) {
            z.tanh()
        } else {
            sigmoid(*z)
        };
    }
    let mut c = vec![0.0; h];
    let mut tanh_c = vec![0.0; h];
    let mut hs = vec![0.0; h];
    for j in 0..h {
        let (i, f, g, o) = (gates[j], gates[h + j], gates[2 * h + j], gates[3 * h + j]);
        c[j] = f * c_prev[j] + i * g;
        tanh_c[j] = c[j].tanh();
        hs[j] = o * tanh_c[j];
    }
    LstmStep {
        gates,
        c,
        tanh_c,
        h: hs,
    }
}

/// One LSTM step: returns `(h_t, c_t)`.
pub fn lstm_cell(
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    weights: &LstmWeights,
) -> Result<(Vec<f64>, Vec<f64>), NumError> {
    let h = weights.hidden();
    if weights.w.rows() != 4 * h || weights.b.len() != 4 * h {
        return Err(NumError::dims("lstm_cell gates", 4 * h, weights.w.rows()));
    }
    if x.len() != weights.input() {
        return Err(NumError::dims("lstm_cell input", weights.input(), x.len()));
    }
    if h_prev.len() != h || c_prev.len() != h {
        return Err(NumError::dims(
            "lstm_cell state",
            h,
            format!("{}/{}", h_prev.len(), c_prev.len()),
        ));
    }
    let s = step(x, h_prev, c_prev, weights);
    Ok((s.h, s.c))
}

/// Runs one direction over `tokens`, right to left when `reverse`.
/// Steps are returned indexed by position.
pub(crate) fn run_direction(
    weights: &LstmWeights,
    embedding: &Matrix,
    tokens: &[usize],
    reverse: bool,
) -> Vec<LstmStep> {
    let h = weights.hidden();
    let n = tokens.len();
    let mut steps: Vec<Option<LstmStep>> = vec![None; n];
    let zeros = vec![0.0; h];
    let mut prev: Option<usize> = None;
    for k in 0..n {
        let t = if reverse { n - 1 - k } else { k };
        let (h_prev, c_prev) = match prev {
            Some(p) => {
                let s = steps[p].as_ref().expect("previous step computed");
                (s.h.as_slice(), s.c.as_slice())
            }
            None => (zeros.as_slice(), zeros.as_slice()),
        };
        let s = step(embedding.row(tokens[t]), h_prev, c_prev, weights);
        steps[t] = Some(s);
        prev = Some(t);
    }
    steps.into_iter().map(|s| s.expect("all steps computed")).collect()
}

fn check_tokens(seq: &EncodedSequence, params: &ModelParams) -> Result<(), NumError> {
    if let Some(&bad) = seq.tokens().iter().find(|&&id| id >= params.dims.vocab) {
        return Err(NumError::IndexOutOfRange {
            index: bad,
            len: params.dims.vocab,
        });
    }
    Ok(())
}

/// Encoder states, one row per position of `seq` (`max_len x context`).
/// Rows at pad positions are zero.
pub fn bilstm_encode(seq: &EncodedSequence, params: &ModelParams) -> Result<Matrix, NumError> {
    check_tokens(seq, params)?;
    let fwd = run_direction(&params.fwd, &params.embedding, seq.tokens(), false);
    let bwd = params
        .bwd
        .as_ref()
        .map(|b| run_direction(b, &params.embedding, seq.tokens(), true));
    Ok(stack_states(&fwd, bwd.as_deref(), seq.max_len(), params.dims))
}

fn stack_states(fwd: &[LstmStep], bwd: Option<&[LstmStep]>, rows: usize, dims: ModelDims) -> Matrix {
    let h = dims.hidden;
    let mut out = Matrix::zeros(rows.max(fwd.len()), dims.context());
    for (t, s) in fwd.iter().enumerate() {
        let row = out.row_mut(t);
        row[..h].copy_from_slice(&s.h);
        if let Some(b) = bwd {
            row[h..].copy_from_slice(&b[t].h);
        }
    }
    out
}

/// Attention-weighted sum of the first `true_length` rows of `states`.
/// Returns the context vector and one weight per row (pad rows get 0).
pub fn attention_pool(
    states: &Matrix,
    true_length: usize,
    params: &ModelParams,
) -> Result<(Vec<f64>, Vec<f64>), NumError> {
    let (ctx, weights, _) = attention_forward(states, true_length, params)?;
    Ok((ctx, weights))
}

fn attention_forward(
    states: &Matrix,
    true_length: usize,
    params: &ModelParams,
) -> Result<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>), NumError> {
    if true_length == 0 {
        return Err(NumError::EmptySequence);
    }
    if true_length > states.rows() || states.cols() != params.attn.w.cols() {
        return Err(NumError::dims(
            "attention_pool",
            format!("<= {} rows x {}", states.rows(), params.attn.w.cols()),
            format!("{true_length} rows x {}", states.cols()),
        ));
    }
    let a = params.attn.w.rows();
    let mut projected = Vec::with_capacity(true_length);
    let mut weights = vec![0.0; states.rows()];
    for t in 0..true_length {
        let mut u = vec![0.0; a];
        params.attn.w.matvec_into(states.row(t), &mut u);
        u.iter_mut().for_each(|v| *v = v.tanh());
        weights[t] = dot(params.attn.v.as_slice(), &u);
        projected.push(u);
    }
    softmax_in_place(&mut weights[..true_length]);
    let mut ctx = vec![0.0; states.cols()];
    for (t, &w) in weights[..true_length].iter().enumerate() {
        crate::numcore::axpy(w, states.row(t), &mut ctx);
    }
    Ok((ctx, weights, projected))
}

/// `softmax(W_o · context + b_o)`, classes in [`super::Class`] order.
pub fn classify(context: &[f64], params: &ModelParams) -> Result<Vec<f64>, NumError> {
    Ok(softmax(&logits(context, params)?))
}

fn logits(context: &[f64], params: &ModelParams) -> Result<Vec<f64>, NumError> {
    if context.len() != params.out.w.cols() {
        return Err(NumError::dims("classify", params.out.w.cols(), context.len()));
    }
    let mut z = params.out.b.as_slice().to_vec();
    params.out.w.matvec_acc(context, &mut z);
    Ok(z)
}

/// Everything the backward pass needs from one forward evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardTrace {
    pub dims: ModelDims,
    pub tokens: Vec<usize>,
    pub label: usize,
    pub fwd: Vec<LstmStep>,
    pub bwd: Option<Vec<LstmStep>>,
    /// Encoder states, `max_len x context`.
    pub states: Matrix,
    /// `tanh(W_a H_t)` per non-pad position (attention models only).
    pub projected: Vec<Vec<f64>>,
    /// Attention weights per position, zero on padding. Empty when attention is off.
    pub weights: Vec<f64>,
    pub context: Vec<f64>,
    /// Inverted-dropout mask on the context; `None` when no dropout was applied.
    pub mask: Option<Vec<f64>>,
    /// Context after dropout, as fed to the output head.
    pub head_input: Vec<f64>,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
    pub loss: f64,
}

/// Full forward pass and cross-entropy loss against `label`.
pub fn forward_loss(
    seq: &EncodedSequence,
    label: usize,
    params: &ModelParams,
    dropout_rate: f64,
    rng: &mut RngStream,
    training: bool,
) -> Result<(f64, ForwardTrace), NumError> {
    if label >= NUM_CLASSES {
        return Err(NumError::IndexOutOfRange {
            index: label,
            len: NUM_CLASSES,
        });
    }
    check_tokens(seq, params)?;
    let n = seq.true_length();
    if n == 0 {
        return Err(NumError::EmptySequence);
    }
    let dims = params.dims;
    let tokens = seq.tokens().to_vec();
    let fwd = run_direction(&params.fwd, &params.embedding, &tokens, false);
    let bwd = params
        .bwd
        .as_ref()
        .map(|b| run_direction(b, &params.embedding, &tokens, true));
    let states = stack_states(&fwd, bwd.as_deref(), seq.max_len(), dims);

    let (context, weights, projected) = if dims.attention {
        attention_forward(&states, n, params)?
    } else {
        let h = dims.hidden;
        let mut ctx = vec![0.0; dims.context()];
        ctx[..h].copy_from_slice(&fwd[n - 1].h);
        if let Some(b) = &bwd {
            ctx[h..].copy_from_slice(&b[0].h);
        }
        (ctx, Vec::new(), Vec::new())
    };

    let mask = if training && dropout_rate > 0.0 {
        Some(dropout_mask(1, context.len(), dropout_rate, rng)?.into_vec())
    } else {
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(NumError::DropoutRate(dropout_rate));
        }
        None
    };
    let head_input = match &mask {
        Some(m) => context.iter().zip(m).map(|(c, k)| c * k).collect(),
        None => context.clone(),
    };
    let logits = logits(&head_input, params)?;
    let probs = softmax(&logits);
    let loss = cross_entropy(&probs, label)?;
    let trace = ForwardTrace {
        dims,
        tokens,
        label,
        fwd,
        bwd,
        states,
        projected,
        weights,
        context,
        mask,
        head_input,
        logits,
        probs,
        loss,
    };
    Ok((loss, trace))
}
