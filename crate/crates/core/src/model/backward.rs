use crate::error::NumError;
use crate::numcore::{axpy, dot, Matrix, CE_FLOOR};
use crate::vocab::{EncodedSequence, PAD_ID};

use super::forward::{ForwardTrace, LstmStep};
use super::params::{Gradients, LstmWeights, ModelParams};

/// Exact gradients of the loss recorded in `trace`.
pub fn backward(
    trace: &ForwardTrace,
    seq: &EncodedSequence,
    label: usize,
    params: &ModelParams,
) -> Result<Gradients, NumError> {
    let mut grads = Gradients::zeros_like(params);
    backward_acc(trace, seq, label, params, &mut grads)?;
    Ok(grads)
}

/// Adds the gradients of the loss in `trace` into `grads`.
pub fn backward_acc(
    trace: &ForwardTrace,
    seq: &EncodedSequence,
    label: usize,
    params: &ModelParams,
    grads: &mut Gradients,
) -> Result<(), NumError> {
    let dims = params.dims;
    if trace.dims != dims || grads.dims != dims {
        return Err(NumError::dims("backward", format!("{dims:?}"), format!("{:?}", trace.dims)));
    }
    if trace.tokens != seq.tokens() || trace.label != label {
        return Err(NumError::dims(
            "backward trace",
            "trace of the same sequence and label",
            "a different input",
        ));
    }
    let n = trace.tokens.len();
    let h = dims.hidden;
    let ctx_dim = dims.context();

    // Softmax + cross-entropy. The floor inside the log scales the usual
    // `p - onehot` by p_y / (p_y + floor).
    let p_y = trace.probs[label];
    let r = p_y / (p_y + CE_FLOOR);
    let mut dlogits: Vec<f64> = trace.probs.iter().map(|p| r * p).collect();
    dlogits[label] -= r;

    grads.out.w.outer_acc(&dlogits, &trace.head_input);
    axpy(1.0, &dlogits, grads.out.b.as_mut_slice());
    let mut dctx = vec![0.0; ctx_dim];
    params.out.w.matvec_t_acc(&dlogits, &mut dctx);
    if let Some(mask) = &trace.mask {
        dctx.iter_mut().zip(mask).for_each(|(d, m)| *d *= m);
    }

    // Gradient w.r.t. each encoder state row.
    let mut dstates = Matrix::zeros(n, ctx_dim);
    if dims.attention {
        let alpha = &trace.weights[..n];
        let dalpha: Vec<f64> = (0..n).map(|t| dot(&dctx, trace.states.row(t))).collect();
        let mean: f64 = alpha.iter().zip(&dalpha).map(|(a, d)| a * d).sum();
        let v = params.attn.v.as_slice();
        let mut dpre = vec![0.0; v.len()];
        for t in 0..n {
            let ds = alpha[t] * (dalpha[t] - mean);
            let u = &trace.projected[t];
            axpy(alpha[t], &dctx, dstates.row_mut(t));
            axpy(ds, u, grads.attn.v.as_mut_slice());
            for k in 0..v.len() {
                dpre[k] = ds * v[k] * (1.0 - u[k] * u[k]);
            }
            grads.attn.w.outer_acc(&dpre, trace.states.row(t));
            params.attn.w.matvec_t_acc(&dpre, dstates.row_mut(t));
        }
    } else {
        axpy(1.0, &dctx[..h], &mut dstates.row_mut(n - 1)[..h]);
        if dims.bidirectional {
            axpy(1.0, &dctx[h..], &mut dstates.row_mut(0)[h..]);
        }
    }

    let g = &mut **grads;
    bptt(
        &params.fwd,
        &mut g.fwd,
        &mut g.embedding,
        &params.embedding,
        &trace.tokens,
        &trace.fwd,
        &dstates,
        0,
        false,
    );
    if let (Some(w), Some(gw), Some(steps)) = (&params.bwd, g.bwd.as_mut(), &trace.bwd) {
        bptt(
            w,
            gw,
            &mut g.embedding,
            &params.embedding,
            &trace.tokens,
            steps,
            &dstates,
            h,
            true,
        );
    }
    Ok(())
}

/// Backpropagation through time for one direction. `offset` selects the
/// direction's columns in `dstates`; `reverse` means the direction ran right
/// to left.
#[allow(clippy::too_many_arguments)]
fn bptt(
    w: &LstmWeights,
    gw: &mut LstmWeights,
    gemb: &mut Matrix,
    emb: &Matrix,
    tokens: &[usize],
    steps: &[LstmStep],
    dstates: &Matrix,
    offset: usize,
    reverse: bool,
) {
    let h = w.hidden();
    let n = tokens.len();
    let zeros = vec![0.0; h];
    let mut dh_next = vec![0.0; h];
    let mut dc_next = vec![0.0; h];
    let mut dz = vec![0.0; 4 * h];
    // Walk positions in the opposite order to the forward recursion.
    for k in (0..n).rev() {
        let t = if reverse { n - 1 - k } else { k };
        let prev = match (reverse, k) {
            (_, 0) => None,
            (false, _) => Some(t - 1),
            (true, _) => Some(t + 1),
        };
        let (h_prev, c_prev) = prev.map_or((zeros.as_slice(), zeros.as_slice()), |p| {
            (steps[p].h.as_slice(), steps[p].c.as_slice())
        });
        let s = &steps[t];
        let ext = &dstates.row(t)[offset..offset + h];
        for j in 0..h {
            let (i, f, g, o) = (s.gates[j], s.gates[h + j], s.gates[2 * h + j], s.gates[3 * h + j]);
            let tc = s.tanh_c[j];
            let dh = ext[j] + dh_next[j];
            let dc = dc_next[j] + dh * o * (1.0 - tc * tc);
            dc_next[j] = dc * f;
            dz[j] = dc * g * i * (1.0 - i);
            dz[h + j] = dc * c_prev[j] * f * (1.0 - f);
            dz[2 * h + j] = dc * i * (1.0 - g * g);
            dz[3 * h + j] = dh * tc * o * (1.0 - o);
        }
        let id = tokens[t];
        gw.w.outer_acc(&dz, emb.row(id));
        gw.u.outer_acc(&dz, h_prev);
        axpy(1.0, &dz, gw.b.as_mut_slice());
        if id != PAD_ID {
            w.w.matvec_t_acc(&dz, gemb.row_mut(id));
        }
        dh_next.fill(0.0);
        w.u.matvec_t_acc(&dz, &mut dh_next);
    }
}
