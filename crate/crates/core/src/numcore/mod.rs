//! Dense numerical kernel: matrices, activations, softmax, cross-entropy,
//! dropout masks and a central-difference gradient checker.

mod matrix;
mod rng;

pub use matrix::{affine, axpy, dot, Matrix};
pub use rng::RngStream;

use crate::error::NumError;

/// Probability floor inside [`cross_entropy`], keeps `ln` away from zero.
pub const CE_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Sigmoid,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Sigmoid => sigmoid(v),
            Activation::Tanh => v.tanh(),
        }
    }
}

#[inline]
pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Elementwise activation.
pub fn activation(kind: Activation, x: &Matrix) -> Matrix {
    x.map(|v| kind.apply(v))
}

/// Numerically stable softmax (max-subtracted).
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let mut out = z.to_vec();
    softmax_in_place(&mut out);
    out
}

pub fn softmax_in_place(z: &mut [f64]) {
    if z.is_empty() {
        return;
    }
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

/// `-ln(probs[class] + 1e-12)`, clamped at zero so a perfect prediction
/// does not report a tiny negative loss.
pub fn cross_entropy(probs: &[f64], true_class: usize) -> Result<f64, NumError> {
    let p = probs.get(true_class).ok_or(NumError::IndexOutOfRange {
        index: true_class,
        len: probs.len(),
    })?;
    Ok((-(p + CE_FLOOR).ln()).max(0.0))
}

/// Inverted-dropout mask: each entry is 0 with probability `rate`, otherwise
/// `1 / (1 - rate)`.
pub fn dropout_mask(
    rows: usize,
    cols: usize,
    rate: f64,
    rng: &mut RngStream,
) -> Result<Matrix, NumError> {
    if !(0.0..1.0).contains(&rate) {
        return Err(NumError::DropoutRate(rate));
    }
    if rate == 0.0 {
        return Ok(Matrix::filled(rows, cols, 1.0));
    }
    let keep = 1.0 / (1.0 - rate);
    let mut mask = Matrix::zeros(rows, cols);
    for v in mask.as_mut_slice() {
        if rng.next_f64() >= rate {
            *v = keep;
        }
    }
    Ok(mask)
}

/// Central differences `(f(θ + εeᵢ) − f(θ − εeᵢ)) / 2ε` for every coordinate.
pub fn finite_diff_gradient<F>(mut f: F, theta: &[f64], eps: f64) -> Result<Vec<f64>, NumError>
where
    F: FnMut(&[f64]) -> f64,
{
    if !(eps > 0.0) {
        return Err(NumError::FiniteDiffStep(eps));
    }
    let mut probe = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let orig = probe[i];
        probe[i] = orig + eps;
        let plus = f(&probe);
        probe[i] = orig - eps;
        let minus = f(&probe);
        probe[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(NumError::NonFinite(i));
        }
        grad.push((plus - minus) / (2.0 * eps));
    }
    Ok(grad)
}

/// Relative error used by the gradient checks: `|a − b| / max(|a|, |b|, floor)`.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}
