//! Python bindings: preprocessing, vocabularies, training, checkpoints and
//! prediction.

use std::collections::HashMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use abusenet::cli::{
    clean_records, encode_records, load_checkpoint, prepare_corpus, save_checkpoint, set_key, DatasetFile,
    ExpectedDims, Record,
};
use abusenet::model::{self, Class};
use abusenet::preprocess::{self, TokenSequence};
use abusenet::trainer::{self, ConfusionMatrix, EvaluationReport, TrainConfig};
use abusenet::vocab::{self, load_glove, GloveVectors};

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_class(s: &str) -> PyResult<Class> {
    s.parse::<Class>().map_err(value_err)
}

/// Word counts used for segmentation and spelling correction.
#[pyclass(name = "UnigramTable")]
#[derive(Clone)]
struct PyUnigramTable {
    inner: preprocess::UnigramTable,
}

#[pymethods]
impl PyUnigramTable {
    #[new]
    #[pyo3(signature = (counts = None))]
    fn new(counts: Option<HashMap<String, u64>>) -> Self {
        let mut inner = preprocess::UnigramTable::new();
        let mut pairs: Vec<_> = counts.unwrap_or_default().into_iter().collect();
        pairs.sort();
        for (w, c) in pairs {
            inner.add(&w, c);
        }
        PyUnigramTable { inner }
    }

    /// Reads `word count` lines.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        preprocess::UnigramTable::load(&path)
            .map(|inner| PyUnigramTable { inner })
            .map_err(|e| PyIOError::new_err(e.to_string()))
    }

    /// Counts alphabetic tokens of the given texts.
    #[staticmethod]
    fn from_texts(texts: Vec<String>) -> Self {
        PyUnigramTable {
            inner: abusenet::cli::unigram_from_texts(texts.iter().map(String::as_str)),
        }
    }

    fn count(&self, word: &str) -> Option<u64> {
        self.inner.count(word)
    }

    fn total(&self) -> u64 {
        self.inner.total()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __contains__(&self, word: &str) -> bool {
        self.inner.contains(word)
    }
}

#[pyfunction]
fn normalize(text: &str) -> String {
    preprocess::normalize(text)
}

#[pyfunction]
fn tokenize(text: &str) -> Vec<String> {
    preprocess::tokenize(text).tokens().to_vec()
}

#[pyfunction]
fn collapse_elongation(token: &str) -> String {
    preprocess::collapse_elongation(token)
}

#[pyfunction]
fn segment_word(token: &str, table: &PyUnigramTable) -> Vec<String> {
    preprocess::segment_word(token, &table.inner)
}

#[pyfunction]
fn correct_spelling(token: &str, table: &PyUnigramTable) -> String {
    preprocess::correct_spelling(token, &table.inner)
}

/// The whole cleaning pipeline.
#[pyfunction]
fn preprocess_text(text: &str, table: &PyUnigramTable) -> Vec<String> {
    preprocess::run_pipeline_text(text, &table.inner).tokens().to_vec()
}

#[pyclass(name = "Vocabulary")]
#[derive(Clone)]
struct PyVocabulary {
    inner: vocab::Vocabulary,
}

#[pymethods]
impl PyVocabulary {
    #[staticmethod]
    #[pyo3(signature = (corpus, min_count = 1))]
    fn build(corpus: Vec<Vec<String>>, min_count: usize) -> Self {
        let seqs: Vec<TokenSequence> = corpus.into_iter().map(TokenSequence::new).collect();
        PyVocabulary {
            inner: vocab::Vocabulary::build(&seqs, min_count),
        }
    }

    fn id(&self, word: &str) -> usize {
        self.inner.id_or_unk(word)
    }

    fn word(&self, id: usize) -> Option<String> {
        self.inner.word(id).map(str::to_string)
    }

    /// Returns `(ids, true_length)`.
    fn encode(&self, tokens: Vec<String>, max_len: usize) -> PyResult<(Vec<usize>, usize)> {
        if max_len == 0 {
            return Err(value_err("max_len must be at least 1"));
        }
        let seq = self.inner.encode(&TokenSequence::new(tokens), max_len);
        Ok((seq.ids().to_vec(), seq.true_length()))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

fn report_dict<'py>(py: Python<'py>, r: &EvaluationReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new_bound(py);
    d.set_item("accuracy", r.accuracy)?;
    d.set_item("macro_f1", r.macro_f1)?;
    d.set_item("weighted_f1", r.weighted_f1)?;
    d.set_item("mean_loss", r.mean_loss)?;
    let per = PyDict::new_bound(py);
    for c in Class::ALL {
        let m = r.per_class[c.index()];
        let e = PyDict::new_bound(py);
        e.set_item("precision", m.precision)?;
        e.set_item("recall", m.recall)?;
        e.set_item("f1", m.f1)?;
        e.set_item("support", m.support)?;
        per.set_item(c.name(), e)?;
    }
    d.set_item("per_class", per)?;
    let rows: Vec<Vec<u64>> = r.confusion.counts.iter().map(|row| row.to_vec()).collect();
    d.set_item("confusion", rows)?;
    Ok(d)
}

/// Metrics of predicted against true labels.
#[pyfunction]
fn evaluate_labels<'py>(py: Python<'py>, truth: Vec<String>, predicted: Vec<String>) -> PyResult<Bound<'py, PyDict>> {
    if truth.len() != predicted.len() || truth.is_empty() {
        return Err(value_err("need two non-empty label lists of equal length"));
    }
    let mut cm = ConfusionMatrix::default();
    for (t, p) in truth.iter().zip(&predicted) {
        cm.record(parse_class(t)?, parse_class(p)?);
    }
    report_dict(py, &EvaluationReport::from_confusion(cm, 0.0))
}

/// A trained model with its vocabulary and unigram table.
#[pyclass(name = "Classifier")]
struct PyClassifier {
    inner: model::Classifier,
}

#[pymethods]
impl PyClassifier {
    #[staticmethod]
    #[pyo3(signature = (path, hidden = None))]
    fn load(path: PathBuf, hidden: Option<usize>) -> PyResult<Self> {
        let expected = ExpectedDims {
            hidden,
            ..Default::default()
        };
        load_checkpoint(&path, &expected)
            .map(|inner| PyClassifier { inner })
            .map_err(value_err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_checkpoint(&self.inner, &path).map_err(value_err)
    }

    /// Label, class probabilities, tokens and per-token attention weights.
    fn predict<'py>(&self, py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyDict>> {
        let p = self.inner.predict_text(text).map_err(value_err)?;
        let d = PyDict::new_bound(py);
        d.set_item("label", p.class.name())?;
        let probs = PyDict::new_bound(py);
        for (c, v) in Class::ALL.iter().zip(&p.probs) {
            probs.set_item(c.name(), *v)?;
        }
        d.set_item("probs", probs)?;
        d.set_item("tokens", p.tokens)?;
        d.set_item("attention", p.attention)?;
        Ok(d)
    }

    /// Metrics on a `label<TAB>text` file.
    fn evaluate<'py>(&self, py: Python<'py>, data: PathBuf) -> PyResult<Bound<'py, PyDict>> {
        let file = DatasetFile::load(&data).map_err(value_err)?;
        let m = &self.inner;
        let encoded = encode_records(&clean_records(&file.records, &m.table), &m.vocab, m.max_len);
        let report = trainer::evaluate(&m.params, &encoded).map_err(value_err)?;
        report_dict(py, &report)
    }

    fn vocabulary(&self) -> PyVocabulary {
        PyVocabulary {
            inner: self.inner.vocab.clone(),
        }
    }

    fn num_parameters(&self) -> usize {
        self.inner.params.num_values()
    }
}

/// Trains on `train_data`, validating on `val_data`, and returns the model
/// with its step losses and final validation metrics. Keyword arguments
/// set configuration fields (`lr`, `epochs`, `hidden`, `attention`, ...).
#[pyfunction]
#[pyo3(signature = (train_data, val_data, glove = None, **config))]
fn train<'py>(
    py: Python<'py>,
    train_data: PathBuf,
    val_data: PathBuf,
    glove: Option<PathBuf>,
    config: Option<&Bound<'py, PyDict>>,
) -> PyResult<(PyClassifier, Vec<(usize, f64)>, Bound<'py, PyDict>)> {
    let mut cfg = TrainConfig::default();
    if let Some(kwargs) = config {
        for (k, v) in kwargs.iter() {
            let key: String = k.extract()?;
            let value = if let Ok(b) = v.extract::<bool>() {
                b.to_string()
            } else {
                v.str()?.to_string()
            };
            set_key(&mut cfg, &key, &value).map_err(|e| {
                if e.is_empty() {
                    value_err(format!("bad value {value:?} for {key}"))
                } else {
                    value_err(e)
                }
            })?;
        }
    }
    cfg.validate().map_err(value_err)?;
    let load = |p: &PathBuf| -> PyResult<Vec<Record>> { Ok(DatasetFile::load(p).map_err(value_err)?.records) };
    let (tr, va) = (load(&train_data)?, load(&val_data)?);
    let vectors = match glove {
        Some(p) => load_glove(&p, cfg.embed_dim).map_err(value_err)?,
        None => GloveVectors {
            dim: cfg.embed_dim,
            ..Default::default()
        },
    };
    let corpus = prepare_corpus(&tr, &va, &cfg, &vectors).map_err(value_err)?;
    let outcome = py
        .allow_threads(|| trainer::train(&cfg, &corpus.train, &corpus.val, &corpus.embedding))
        .map_err(value_err)?;
    let report = report_dict(py, &outcome.report)?;
    let classifier = PyClassifier {
        inner: model::Classifier {
            params: outcome.params,
            vocab: corpus.vocab,
            table: corpus.table,
            max_len: cfg.max_len,
        },
    };
    Ok((classifier, outcome.history, report))
}

/// Largest relative error between backprop and finite differences on a
/// tiny random model.
#[pyfunction]
#[pyo3(signature = (seed, bidirectional = true, attention = true, eps = 1e-5))]
fn gradient_check(seed: u64, bidirectional: bool, attention: bool, eps: f64) -> PyResult<f64> {
    model::gradient_check(model::tiny_dims(bidirectional, attention), seed, eps)
        .map(|r| r.max_rel_error)
        .map_err(value_err)
}

#[pymodule]
fn abusenet_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyUnigramTable>()?;
    m.add_class::<PyVocabulary>()?;
    m.add_class::<PyClassifier>()?;
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(collapse_elongation, m)?)?;
    m.add_function(wrap_pyfunction!(segment_word, m)?)?;
    m.add_function(wrap_pyfunction!(correct_spelling, m)?)?;
    m.add_function(wrap_pyfunction!(preprocess_text, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_labels, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(gradient_check, m)?)?;
    m.add("CLASSES", Class::ALL.iter().map(|c| c.name()).collect::<Vec<_>>())?;
    Ok(())
}
