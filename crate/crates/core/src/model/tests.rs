use super::*;
use crate::numcore::{Matrix, RngStream};
use crate::preprocess::{RawText, TokenSequence, UnigramTable};
use crate::vocab::{EncodedSequence, Vocabulary, PAD_ID};

fn dims(bidirectional: bool) -> ModelDims {
    ModelDims {
        vocab: 12,
        embed: 5,
        hidden: 4,
        attn: 3,
        bidirectional,
        attention: true,
    }
}

fn random_params(dims: ModelDims, seed: u64) -> ModelParams {
    let mut rng = RngStream::new(seed);
    let mut emb = Matrix::zeros(dims.vocab, dims.embed);
    emb.as_mut_slice().iter_mut().for_each(|v| *v = rng.uniform(-1.0, 1.0));
    ModelParams::init(dims, emb, seed + 1).unwrap()
}

fn seq(ids: &[usize], max_len: usize) -> EncodedSequence {
    let mut v = ids.to_vec();
    v.resize(max_len, PAD_ID);
    EncodedSequence::new(v, ids.len())
}

#[test]
fn lstm_cell_zero_fixed_point() {
    let w = LstmWeights::zeros(3, 2);
    let (h, c) = lstm_cell(&[0.0; 3], &[0.0; 2], &[0.0; 2], &w).unwrap();
    assert_eq!(h, vec![0.0; 2]);
    assert_eq!(c, vec![0.0; 2]);
}

#[test]
fn lstm_cell_zero_params_halves_cell() {
    let w = LstmWeights::zeros(3, 2);
    let (_, c) = lstm_cell(&[0.3, -1.0, 2.0], &[0.1, 0.2], &[0.8, -0.4], &w).unwrap();
    assert_eq!(c, vec![0.4, -0.2]);
}

#[test]
fn lstm_cell_output_bounded() {
    let p = random_params(dims(true), 3);
    let mut rng = RngStream::new(11);
    let x: Vec<f64> = (0..5).map(|_| rng.uniform(-3.0, 3.0)).collect();
    let (h, c) = lstm_cell(&x, &[0.9, -0.9, 0.5, 0.0], &[2.0, -2.0, 0.0, 1.0], &p.fwd).unwrap();
    assert!(h.iter().chain(&c).all(|v| v.is_finite()));
    assert!(h.iter().all(|v| v.abs() <= 1.0));
}

#[test]
fn lstm_cell_rejects_bad_dims() {
    let w = LstmWeights::zeros(3, 2);
    assert!(lstm_cell(&[0.0; 2], &[0.0; 2], &[0.0; 2], &w).is_err());
    assert!(lstm_cell(&[0.0; 3], &[0.0; 3], &[0.0; 2], &w).is_err());
}

#[test]
fn encode_zero_params_gives_zero_states() {
    let p = ModelParams::zeros(dims(true));
    let h = bilstm_encode(&seq(&[2, 3, 4], 6), &p).unwrap();
    assert_eq!(h.shape(), (6, 8));
    assert!(h.as_slice().iter().all(|&v| v == 0.0));
}

#[test]
fn encode_causality() {
    let p = random_params(dims(true), 5);
    let a = bilstm_encode(&seq(&[2, 3, 4, 5, 6], 6), &p).unwrap();
    let b = bilstm_encode(&seq(&[2, 3, 4, 9, 6], 6), &p).unwrap();
    let h = 4;
    // Forward half of positions before the change is untouched.
    for t in 0..3 {
        assert_eq!(&a.row(t)[..h], &b.row(t)[..h]);
    }
    assert_ne!(&a.row(3)[..h], &b.row(3)[..h]);
    // Backward half of positions after the change is untouched.
    assert_eq!(&a.row(4)[h..], &b.row(4)[h..]);
    assert_ne!(&a.row(2)[h..], &b.row(2)[h..]);
}

#[test]
fn encode_single_token_and_unidirectional_shape() {
    let p = random_params(dims(true), 6);
    let h = bilstm_encode(&seq(&[7], 4), &p).unwrap();
    let nonzero_rows = (0..4).filter(|&t| h.row(t).iter().any(|&v| v != 0.0)).count();
    assert_eq!(nonzero_rows, 1);

    let p = random_params(dims(false), 6);
    let h = bilstm_encode(&seq(&[7, 8], 4), &p).unwrap();
    assert_eq!(h.shape(), (4, 4));
}

#[test]
fn attention_identical_rows_are_uniform() {
    let p = random_params(dims(true), 7);
    let row = vec![0.3, -0.1, 0.5, 0.2, 0.0, 0.9, -0.4, 0.1];
    let mut states = Matrix::zeros(5, 8);
    for t in 0..3 {
        states.row_mut(t).copy_from_slice(&row);
    }
    let (ctx, w) = attention_pool(&states, 3, &p).unwrap();
    for t in 0..3 {
        assert!((w[t] - 1.0 / 3.0).abs() < 1e-12);
    }
    assert_eq!(&w[3..], &[0.0, 0.0]);
    for (c, r) in ctx.iter().zip(&row) {
        assert!((c - r).abs() < 1e-12);
    }
}

#[test]
fn attention_single_position_and_errors() {
    let p = random_params(dims(true), 8);
    let mut states = Matrix::zeros(3, 8);
    states.row_mut(0).copy_from_slice(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
    let (ctx, w) = attention_pool(&states, 1, &p).unwrap();
    assert_eq!(w, vec![1.0, 0.0, 0.0]);
    assert_eq!(ctx, states.row(0));
    assert_eq!(attention_pool(&states, 0, &p), Err(crate::error::NumError::EmptySequence));
}

#[test]
fn attention_weights_normalized() {
    let p = random_params(dims(true), 9);
    for s in 0..10u64 {
        let mut rng = RngStream::new(s);
        let ids: Vec<usize> = (0..1 + rng.below(7)).map(|_| 1 + rng.below(11)).collect();
        let h = bilstm_encode(&seq(&ids, 8), &p).unwrap();
        let (_, w) = attention_pool(&h, ids.len(), &p).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(w.iter().all(|&v| v >= 0.0));
        assert!(w[ids.len()..].iter().all(|&v| v == 0.0));
    }
}

#[test]
fn classify_examples() {
    let mut p = ModelParams::zeros(dims(true));
    let probs = classify(&[0.7; 8], &p).unwrap();
    assert_eq!(probs, vec![0.25; 4]);
    p.out.b.as_mut_slice().copy_from_slice(&[10.0, 0.0, 0.0, 0.0]);
    assert!(classify(&[0.7; 8], &p).unwrap()[0] > 0.999);
    let p = random_params(dims(true), 10);
    let probs = classify(&[0.3, -2.0, 1.0, 0.0, 5.0, 0.1, 0.2, -0.3], &p).unwrap();
    assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
}

#[test]
fn zero_params_loss_is_ln4() {
    let p = ModelParams::zeros(dims(true));
    let (loss, trace) =
        forward_loss(&seq(&[2, 3], 4), 2, &p, 0.5, &mut RngStream::new(0), true).unwrap();
    assert!((loss - 4f64.ln()).abs() < 1e-9);
    assert!((trace.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn forward_determinism_and_dropout_zero() {
    let p = random_params(dims(true), 12);
    let s = seq(&[2, 5, 7, 3], 6);
    let (a, _) = forward_loss(&s, 1, &p, 0.5, &mut RngStream::new(1), false).unwrap();
    let (b, _) = forward_loss(&s, 1, &p, 0.5, &mut RngStream::new(2), false).unwrap();
    assert_eq!(a.to_bits(), b.to_bits());
    let (c, _) = forward_loss(&s, 1, &p, 0.0, &mut RngStream::new(3), true).unwrap();
    assert_eq!(a.to_bits(), c.to_bits());
    let (d, _) = forward_loss(&s, 1, &p, 0.5, &mut RngStream::new(4), true).unwrap();
    let (e, _) = forward_loss(&s, 1, &p, 0.5, &mut RngStream::new(4), true).unwrap();
    assert_eq!(d.to_bits(), e.to_bits());
}

#[test]
fn forward_rejects_bad_inputs() {
    let p = random_params(dims(true), 13);
    let mut rng = RngStream::new(0);
    assert!(forward_loss(&seq(&[2], 3), 4, &p, 0.0, &mut rng, false).is_err());
    assert!(forward_loss(&seq(&[], 3), 0, &p, 0.0, &mut rng, false).is_err());
    assert!(forward_loss(&seq(&[99], 3), 0, &p, 0.0, &mut rng, false).is_err());
}

#[test]
fn logit_gradient_is_probs_minus_onehot() {
    let p = random_params(dims(true), 14);
    let s = seq(&[2, 3, 4], 5);
    let (_, trace) = forward_loss(&s, 3, &p, 0.0, &mut RngStream::new(0), false).unwrap();
    let g = backward(&trace, &s, 3, &p).unwrap();
    for (k, (&gb, &pk)) in g.out.b.as_slice().iter().zip(&trace.probs).enumerate() {
        let expected = pk - if k == 3 { 1.0 } else { 0.0 };
        assert!((gb - expected).abs() < 1e-11);
    }
}

#[test]
fn confident_correct_prediction_has_zero_logit_gradient() {
    let mut p = ModelParams::zeros(dims(true));
    p.out.b.as_mut_slice().copy_from_slice(&[0.0, 800.0, 0.0, 0.0]);
    let s = seq(&[2, 3], 4);
    let (_, trace) = forward_loss(&s, 1, &p, 0.0, &mut RngStream::new(0), false).unwrap();
    assert_eq!(trace.probs, vec![0.0, 1.0, 0.0, 0.0]);
    let g = backward(&trace, &s, 1, &p).unwrap();
    assert!(g.out.b.as_slice().iter().all(|&v| v == 0.0));
}

#[test]
fn unused_and_pad_rows_get_no_gradient() {
    let p = random_params(dims(true), 15);
    let s = seq(&[2, 3, 2], 5);
    let (_, trace) = forward_loss(&s, 0, &p, 0.0, &mut RngStream::new(0), false).unwrap();
    let g = backward(&trace, &s, 0, &p).unwrap();
    for row in [0usize, 1, 4, 5, 11] {
        assert!(g.embedding.row(row).iter().all(|&v| v == 0.0), "row {row}");
    }
    assert!(g.embedding.row(2).iter().any(|&v| v != 0.0));
}

#[test]
fn backward_rejects_mismatched_trace() {
    let p = random_params(dims(true), 16);
    let s = seq(&[2, 3], 4);
    let (_, trace) = forward_loss(&s, 0, &p, 0.0, &mut RngStream::new(0), false).unwrap();
    assert!(backward(&trace, &seq(&[2, 4], 4), 0, &p).is_err());
    assert!(backward(&trace, &s, 1, &p).is_err());
    let other = random_params(dims(false), 16);
    assert!(backward(&trace, &s, 0, &other).is_err());
}

#[test]
fn gradient_check_all_modes() {
    for (bi, attn) in [(true, true), (false, true), (true, false), (false, false)] {
        for seed in 0..5 {
            let r = gradient_check(tiny_dims(bi, attn), seed, 1e-5).unwrap();
            assert!(
                r.max_rel_error <= 1e-4,
                "bi={bi} attn={attn} seed={seed}: {:?}",
                r.per_tensor
            );
        }
    }
}

#[test]
fn unidirectional_shapes() {
    let p = ModelParams::zeros(dims(false));
    assert!(p.bwd.is_none());
    assert_eq!(p.out.w.shape(), (4, 4));
    assert_eq!(p.attn.w.shape(), (3, 4));
    assert_eq!(p.tensor_count(), 8);
    let p = ModelParams::zeros(dims(true));
    assert_eq!(p.out.w.shape(), (4, 8));
    assert_eq!(p.tensors().len(), p.tensor_count());
}

#[test]
fn init_uses_forget_bias_and_zero_pad_row() {
    let d = dims(true);
    let p = ModelParams::init(d, Matrix::filled(d.vocab, d.embed, 0.5), 1).unwrap();
    let b = p.fwd.b.as_slice();
    assert!(b[..4].iter().all(|&v| v == 0.0));
    assert!(b[4..8].iter().all(|&v| v == FORGET_BIAS));
    assert!(b[8..].iter().all(|&v| v == 0.0));
    assert!(p.embedding.row(PAD_ID).iter().all(|&v| v == 0.0));
    let bound = 1.0 / (d.embed as f64).sqrt();
    assert!(p.fwd.w.max_abs() <= bound);
    assert_eq!(p, ModelParams::init(d, Matrix::filled(d.vocab, d.embed, 0.5), 1).unwrap());
    assert!(ModelParams::init(d, Matrix::zeros(3, 3), 1).is_err());
}

#[test]
fn flat_roundtrip() {
    let p = random_params(dims(true), 17);
    let mut q = ModelParams::zeros(p.dims);
    q.set_flat(&p.to_flat()).unwrap();
    assert_eq!(p, q);
    assert!(q.set_flat(&[0.0]).is_err());
}

#[test]
fn zero_model_predicts_normal() {
    let table = UnigramTable::from_counts([("you", 3), ("suck", 2)]);
    let corpus = [TokenSequence::new(["you", "suck"])];
    let vocab = Vocabulary::build(&corpus, 1);
    let mut d = dims(true);
    d.vocab = vocab.len();
    let clf = Classifier {
        params: ModelParams::zeros(d),
        vocab,
        table,
        max_len: 10,
    };
    let pred = clf.predict(&RawText::new("You SUCK", "x")).unwrap();
    assert_eq!(pred.class, Class::Normal);
    assert_eq!(pred.tokens, ["you", "suck"]);
    assert!((pred.attention.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert!(matches!(
        clf.predict(&RawText::new("   ", "x")),
        Err(PredictError::EmptyInput(_))
    ));
}

#[test]
fn argmax_breaks_ties_low() {
    assert_eq!(argmax(&[0.25; 4]), 0);
    assert_eq!(argmax(&[0.1, 0.4, 0.4, 0.1]), 1);
}

#[test]
fn class_names_roundtrip() {
    for c in Class::ALL {
        assert_eq!(c.name().parse::<Class>().unwrap(), c);
        assert_eq!(Class::from_index(c.index()), Some(c));
    }
    assert!("angry".parse::<Class>().is_err());
}
