use super::*;
use crate::model::NUM_CLASSES;
use crate::numcore::Matrix;
use crate::vocab::EmbeddingMatrix;
use Class::*;

const VOCAB: usize = 12;

fn small_config() -> TrainConfig {
    TrainConfig {
        lr: 0.05,
        batch_size: 4,
        epochs: 3,
        hidden: 4,
        attn: 3,
        embed_dim: 5,
        max_len: 6,
        seed: 7,
        ..TrainConfig::default()
    }
}

fn embedding(dim: usize) -> EmbeddingMatrix {
    let mut rng = RngStream::new(99);
    let mut m = Matrix::zeros(VOCAB, dim);
    for v in m.as_mut_slice() {
        *v = rng.uniform(-0.5, 0.5);
    }
    m.row_mut(0).fill(0.0);
    EmbeddingMatrix {
        matrix: m,
        pretrained_rows: 0,
    }
}

/// Class `c` is marked by token `2 + c` somewhere in a short sequence.
fn toy_data(n: usize, seed: u64) -> Dataset {
    let mut rng = RngStream::new(seed);
    (0..n)
        .map(|i| {
            let label = Class::from_index(i % NUM_CLASSES).unwrap();
            let len = 2 + rng.below(4);
            let mut ids: Vec<usize> = (0..len).map(|_| 6 + rng.below(VOCAB - 6)).collect();
            let at = rng.below(len);
            ids[at] = 2 + label.index();
            ids.resize(6, 0);
            LabeledExample {
                seq: EncodedSequence::new(ids, len),
                label,
            }
        })
        .collect()
}

fn labels(n: &[(Class, usize)]) -> Vec<(usize, Class)> {
    let mut out = Vec::new();
    for &(c, k) in n {
        for _ in 0..k {
            out.push((out.len(), c));
        }
    }
    out
}

fn count(items: &[(usize, Class)], c: Class) -> usize {
    items.iter().filter(|x| x.1 == c).count()
}

#[test]
fn split_fifty_examples() {
    let items = labels(&[(Normal, 30), (Abusive, 10), (Hateful, 5), (Spam, 5)]);
    let (train, val, test) = stratified_split(&items, |x| x.1, 0.8, 0.1, 3).unwrap();
    let got: Vec<usize> = [Normal, Abusive, Hateful, Spam].iter().map(|&c| count(&train, c)).collect();
    assert_eq!(got, [24, 8, 4, 4]);
    assert_eq!(train.len() + val.len() + test.len(), 50);
}

#[test]
fn split_is_a_deterministic_partition() {
    let items = labels(&[(Normal, 61), (Spam, 14), (Hateful, 7), (Abusive, 21)]);
    let a = stratified_split(&items, |x| x.1, 0.8, 0.1, 11).unwrap();
    let b = stratified_split(&items, |x| x.1, 0.8, 0.1, 11).unwrap();
    assert_eq!(a, b);
    let mut all: Vec<usize> = a.0.iter().chain(&a.1).chain(&a.2).map(|x| x.0).collect();
    all.sort_unstable();
    assert_eq!(all, (0..items.len()).collect::<Vec<_>>());
    for c in Class::ALL {
        let n = count(&items, c) as f64;
        assert!((count(&a.0, c) as f64 - 0.8 * n).abs() <= 1.0);
        assert!((count(&a.1, c) as f64 - 0.1 * n).abs() <= 1.0);
    }
    let other = stratified_split(&items, |x| x.1, 0.8, 0.1, 12).unwrap();
    assert_ne!(a.0, other.0);
}

#[test]
fn split_rejects_bad_fractions_and_starved_classes() {
    let items = labels(&[(Normal, 20), (Spam, 3)]);
    assert!(matches!(
        stratified_split(&items, |x| x.1, 0.9, 0.1, 0),
        Err(TrainError::Config(_))
    ));
    assert!(matches!(
        stratified_split(&items, |x| x.1, 0.8, 0.1, 0),
        Err(TrainError::Stratification { class: "spam", total: 3, split: "validation" })
    ));
    // Classes under three examples are allowed to miss a split.
    let tiny = labels(&[(Normal, 20), (Spam, 2)]);
    assert!(stratified_split(&tiny, |x| x.1, 0.8, 0.1, 0).is_ok());
}

#[test]
fn config_validation() {
    assert!(TrainConfig::default().validate().is_ok());
    for bad in [
        TrainConfig { lr: 0.0, ..TrainConfig::default() },
        TrainConfig { dropout: 1.0, ..TrainConfig::default() },
        TrainConfig { dropout: -0.1, ..TrainConfig::default() },
        TrainConfig { batch_size: 0, ..TrainConfig::default() },
    ] {
        assert!(matches!(bad.validate(), Err(TrainError::Config(_))));
    }
}

#[test]
fn zero_epochs_returns_initialization() {
    let config = TrainConfig { epochs: 0, ..small_config() };
    let data = toy_data(8, 1);
    let emb = embedding(5);
    let out = train(&config, &data, &data, &emb).unwrap();
    assert!(out.history.is_empty());
    assert_eq!(out.params, init_params(&config, &emb).unwrap());
    assert_eq!(out.report, evaluate(&out.params, &data).unwrap());
}

#[test]
fn step_count_and_log_format() {
    let config = small_config();
    let data = toy_data(10, 2);
    let out = train(&config, &data, &data, &embedding(5)).unwrap();
    // ceil(10 / 4) = 3 steps per epoch.
    assert_eq!(out.history.len(), 9);
    assert_eq!(out.history.iter().map(|s| s.0).collect::<Vec<_>>(), (1..=9).collect::<Vec<_>>());
    assert_eq!(out.epoch_reports.len(), 3);
    let log = out.log();
    let first = log.lines().next().unwrap();
    assert_eq!(first, format!("step 1: loss = {:?}", out.history[0].1));
    assert!(log.contains("\nValidation Accuracy = "));
    assert!(log.ends_with(&format!("F1 Score = {:?}\n", out.report.weighted_f1)));
}

#[test]
fn training_is_bit_reproducible() {
    let data = toy_data(12, 3);
    let emb = embedding(5);
    let a = train(&small_config(), &data, &data, &emb).unwrap();
    let b = train(&small_config(), &data, &data, &emb).unwrap();
    assert_eq!(a.params, b.params);
    assert_eq!(a.log(), b.log());
    let c = train(&TrainConfig { seed: 8, ..small_config() }, &data, &data, &emb).unwrap();
    assert_ne!(a.params, c.params);
}

#[test]
fn training_reduces_loss_on_toy_task() {
    let data = toy_data(24, 4);
    let config = TrainConfig {
        epochs: 40,
        lr: 0.05,
        dropout: 0.0,
        ..small_config()
    };
    let out = train(&config, &data, &data, &embedding(5)).unwrap();
    assert!(out.report.mean_loss < 0.5 * 4f64.ln(), "loss {}", out.report.mean_loss);
    assert!(out.report.accuracy >= 0.9);
}

#[test]
fn frozen_embeddings_do_not_move() {
    let data = toy_data(8, 5);
    let emb = embedding(5);
    let config = TrainConfig {
        freeze_embeddings: true,
        ..small_config()
    };
    let out = train(&config, &data, &data, &emb).unwrap();
    assert_eq!(out.params.embedding, emb.matrix);
    let moved = train(&small_config(), &data, &data, &emb).unwrap();
    assert_ne!(moved.params.embedding, emb.matrix);
}

#[test]
fn gradient_descent_and_unidirectional_variants_run() {
    let data = toy_data(8, 6);
    let config = TrainConfig {
        optimizer: OptimizerKind::Gd,
        bidirectional: false,
        attention: false,
        ..small_config()
    };
    let out = train(&config, &data, &data, &embedding(5)).unwrap();
    assert_eq!(out.params.tensor_count(), 8);
    assert!(out.params.is_finite());
}

#[test]
fn observer_can_stop_training() {
    let data = toy_data(8, 7);
    let mut seen = 0;
    let out = train_with(&small_config(), &data, &data, &embedding(5), |e| {
        if let TrainEvent::Epoch { .. } = e {
            seen += 1;
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    })
    .unwrap();
    assert_eq!(seen, 1);
    assert_eq!(out.history.len(), 2);
    assert_eq!(out.epoch_reports.len(), 1);
}

#[test]
fn empty_sets_are_errors() {
    let data = toy_data(4, 8);
    let emb = embedding(5);
    assert!(matches!(train(&small_config(), &[], &data, &emb), Err(TrainError::EmptyTrainingSet)));
    assert!(matches!(train(&small_config(), &data, &[], &emb), Err(TrainError::EmptyEvaluationSet)));
    let params = init_params(&small_config(), &emb).unwrap();
    assert!(matches!(evaluate(&params, &[]), Err(TrainError::EmptyEvaluationSet)));
}

#[test]
fn evaluate_matches_per_example_recount() {
    let data = toy_data(30, 9);
    let params = init_params(&small_config(), &embedding(5)).unwrap();
    let report = evaluate(&params, &data).unwrap();
    let mut correct = 0;
    let mut rng = RngStream::new(0);
    for ex in &data {
        let (_, trace) = forward_loss(&ex.seq, ex.label.index(), &params, 0.0, &mut rng, false).unwrap();
        if argmax(&trace.probs) == ex.label.index() {
            correct += 1;
        }
    }
    assert_eq!(report.confusion.total(), 30);
    assert_eq!(report.accuracy, correct as f64 / 30.0);
}

#[test]
fn single_point_grid_equals_plain_training() {
    let data = toy_data(8, 10);
    let emb = embedding(5);
    let config = small_config();
    let grid = [GridValue {
        label: "only".into(),
        config: config.clone(),
    }];
    let report = run_grid(AblationAxis::Lr, &grid, 1, &data, &data, &emb).unwrap();
    let plain = train(&config, &data, &data, &emb).unwrap();
    assert_eq!(report.points.len(), 1);
    assert_eq!(report.points[0].val_accuracy, plain.report.accuracy);
    assert_eq!(report.points[0].macro_f1, plain.report.macro_f1);
}

#[test]
fn grids_have_table_shapes() {
    let base = TrainConfig::default();
    let lr = AblationAxis::Lr.grid(&base);
    assert_eq!(lr.iter().map(|g| g.config.lr).collect::<Vec<_>>(), LEARNING_RATES);
    assert_eq!(lr[0].label, "0.001");
    let att = AblationAxis::Attention.grid(&base);
    assert_eq!(att.len(), 2);
    assert_eq!(att[0].label, "BiRNN +Attention");
    assert!(att[0].config.attention && !att[1].config.attention);
    let drop = AblationAxis::Dropout.grid(&TrainConfig { dropout: 0.0, ..base.clone() });
    assert_eq!((drop[0].config.dropout, drop[1].config.dropout), (0.5, 0.0));
    let dir = AblationAxis::Direction.grid(&base);
    assert!(dir[0].config.bidirectional && !dir[1].config.bidirectional);
    let opt = AblationAxis::Optimizer.grid(&base);
    assert_eq!(opt[1].config.optimizer, OptimizerKind::Gd);
    for axis in AblationAxis::ALL {
        assert_eq!(axis.name().parse::<AblationAxis>().unwrap(), axis);
    }
    assert!("width".parse::<AblationAxis>().is_err());
}

#[test]
fn ablation_table_and_csv() {
    let data = toy_data(8, 11);
    let config = TrainConfig { epochs: 1, ..small_config() };
    let report = ablation_run(&config, AblationAxis::Attention, 2, &data, &data, &embedding(5)).unwrap();
    let table = report.to_string();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("Model") && lines[0].ends_with("Accuracy (%)"));
    assert!(lines[2].starts_with("BiRNN +Attention"));
    let csv = report.to_csv();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().starts_with("attention,BiRNN +Attention,2,"));
    assert_eq!(report.points[0].per_seed_accuracy.len(), 2);
}
