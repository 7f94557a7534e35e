//! Plain gradient descent and Adam over every [`ModelParams`] tensor.

use crate::error::NumError;
use crate::model::{Gradients, ModelParams};
use crate::numcore::Matrix;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OptimizerKind {
    Adam,
    /// Plain gradient descent.
    Gd,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Adam => "adam",
            OptimizerKind::Gd => "gd",
        }
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "adam" => Ok(OptimizerKind::Adam),
            "gd" | "sgd" => Ok(OptimizerKind::Gd),
            other => Err(format!("unknown optimizer {other:?} (expected adam or gd)")),
        }
    }
}

fn check_pair(p: &Matrix, g: &Matrix, name: &str) -> Result<(), NumError> {
    if p.shape() != g.shape() {
        return Err(NumError::Dimension {
            op: "optimizer",
            expected: format!("{name} {}x{}", p.rows(), p.cols()),
            actual: format!("{}x{}", g.rows(), g.cols()),
        });
    }
    Ok(())
}

fn check_shapes(params: &ModelParams, grads: &Gradients) -> Result<(), NumError> {
    let p = params.tensors();
    let g = grads.tensors();
    if p.len() != g.len() {
        return Err(NumError::dims("optimizer tensor count", p.len(), g.len()));
    }
    for ((name, pm), (_, gm)) in p.iter().zip(&g) {
        check_pair(pm, gm, name)?;
    }
    Ok(())
}

/// `θ ← θ − lr·g`. Returns the number of tensors updated.
pub fn sgd_step(params: &mut ModelParams, grads: &Gradients, lr: f64) -> Result<usize, NumError> {
    check_shapes(params, grads)?;
    let mut touched = 0;
    for ((_, p), (_, g)) in params.tensors_mut().into_iter().zip(grads.tensors()) {
        for (x, &d) in p.as_mut_slice().iter_mut().zip(g.as_slice()) {
            *x -= lr * d;
        }
        touched += 1;
    }
    Ok(touched)
}

/// First and second moment estimates for Adam.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<Matrix>,
    pub v: Vec<Matrix>,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &ModelParams) -> Self {
        let zeros: Vec<Matrix> = params
            .tensors()
            .iter()
            .map(|(_, m)| Matrix::zeros(m.rows(), m.cols()))
            .collect();
        AdamState {
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }
}

/// One bias-corrected Adam update. Returns the number of tensors updated.
pub fn adam_step(
    params: &mut ModelParams,
    grads: &Gradients,
    state: &mut AdamState,
    lr: f64,
) -> Result<usize, NumError> {
    check_shapes(params, grads)?;
    if state.m.len() != params.tensor_count() || state.v.len() != params.tensor_count() {
        return Err(NumError::dims(
            "adam state",
            params.tensor_count(),
            state.m.len(),
        ));
    }
    for (((name, p), m), v) in params.tensors().into_iter().zip(&state.m).zip(&state.v) {
        check_pair(p, m, name)?;
        check_pair(p, v, name)?;
    }
    state.t += 1;
    let t = state.t as i32;
    let bias1 = 1.0 - ADAM_BETA1.powi(t);
    let bias2 = 1.0 - ADAM_BETA2.powi(t);
    let mut touched = 0;
    let tensors = params.tensors_mut().into_iter().zip(grads.tensors());
    for (((_, p), (_, g)), (m, v)) in tensors.zip(state.m.iter_mut().zip(state.v.iter_mut())) {
        let (p, g, m, v) = (p.as_mut_slice(), g.as_slice(), m.as_mut_slice(), v.as_mut_slice());
        for k in 0..p.len() {
            let gk = g[k];
            m[k] = ADAM_BETA1 * m[k] + (1.0 - ADAM_BETA1) * gk;
            v[k] = ADAM_BETA2 * v[k] + (1.0 - ADAM_BETA2) * gk * gk;
            let m_hat = m[k] / bias1;
            let v_hat = v[k] / bias2;
            p[k] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }
        touched += 1;
    }
    Ok(touched)
}
