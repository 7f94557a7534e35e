use crate::error::NumError;
use crate::numcore::{finite_diff_gradient, relative_error, Matrix, RngStream};
use crate::vocab::EncodedSequence;

use super::backward::backward;
use super::forward::forward_loss;
use super::params::{ModelDims, ModelParams};
use super::NUM_CLASSES;

/// Denominator floor for relative errors, so gradients that are zero up to
/// rounding are compared absolutely.
pub const REL_ERROR_FLOOR: f64 = 1e-6;

const TINY_TOKENS: usize = 5;
const TINY_MAX_LEN: usize = 7;
const CHECK_DROPOUT: f64 = 0.5;

/// V=10, d=4, h=3, a=3.
pub fn tiny_dims(bidirectional: bool, attention: bool) -> ModelDims {
    ModelDims {
        vocab: 10,
        embed: 4,
        hidden: 3,
        attn: 3,
        bidirectional,
        attention,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub seed: u64,
    pub max_rel_error: f64,
    /// Largest relative error per tensor, in tensor order.
    pub per_tensor: Vec<(&'static str, f64)>,
    pub values_checked: usize,
}

/// Compares analytic gradients of a randomly initialized model against
/// central finite differences with step `eps`. The dropout mask is held
/// fixed across evaluations so the check covers the dropout path.
pub fn gradient_check(dims: ModelDims, seed: u64, eps: f64) -> Result<GradCheckReport, NumError> {
    let mut rng = RngStream::new(seed);
    let mut embedding = Matrix::zeros(dims.vocab, dims.embed);
    for v in embedding.as_mut_slice() {
        *v = rng.uniform(-0.5, 0.5);
    }
    let mut params = ModelParams::init(dims, embedding, rng.next_u64())?;
    for (name, m) in params.tensors_mut() {
        if name.ends_with(".b") {
            for v in m.as_mut_slice() {
                *v += rng.uniform(-0.2, 0.2);
            }
        }
    }
    let tokens: Vec<usize> = (0..TINY_TOKENS)
        .map(|_| 1 + rng.below(dims.vocab - 1))
        .collect();
    let mut ids = tokens;
    ids.resize(TINY_MAX_LEN, 0);
    let seq = EncodedSequence::new(ids, TINY_TOKENS);
    let label = rng.below(NUM_CLASSES);
    let mask_seed = rng.next_u64();

    let (_, trace) = forward_loss(
        &seq,
        label,
        &params,
        CHECK_DROPOUT,
        &mut RngStream::new(mask_seed),
        true,
    )?;
    let analytic = backward(&trace, &seq, label, &params)?.to_flat();

    let theta = params.to_flat();
    let mut probe = params.clone();
    let numeric = finite_diff_gradient(
        |flat| {
            probe.set_flat(flat).expect("same length");
            forward_loss(
                &seq,
                label,
                &probe,
                CHECK_DROPOUT,
                &mut RngStream::new(mask_seed),
                true,
            )
            .map_or(f64::NAN, |(loss, _)| loss)
        },
        &theta,
        eps,
    )?;

    let mut per_tensor = Vec::new();
    let mut offset = 0;
    let mut max_rel_error: f64 = 0.0;
    for (name, m) in params.tensors() {
        let n = m.len();
        let worst = analytic[offset..offset + n]
            .iter()
            .zip(&numeric[offset..offset + n])
            .map(|(&a, &b)| relative_error(a, b, REL_ERROR_FLOOR))
            .fold(0.0, f64::max);
        max_rel_error = max_rel_error.max(worst);
        per_tensor.push((name, worst));
        offset += n;
    }
    Ok(GradCheckReport {
        seed,
        max_rel_error,
        per_tensor,
        values_checked: theta.len(),
    })
}
