//! Binary checkpoint format, all integers and floats little-endian:
//!
//! ```text
//! "ABLM1" | version u32
//! vocab u32 | embed u32 | hidden u32 | attn u32 | max_len u32 | bidirectional u8 | attention u8
//! class count u32 | (len u32, name)*
//! vocab entries u32 | (len u32, word, count u64)*      ids 2.. in order
//! unigram entries u32 | (len u32, word, count u64)*    sorted by word
//! tensors u32 | (name len u32, name, rank u32, dims u32 * rank, f64 * prod(dims))*
//! ```

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{Class, Classifier, ModelDims, ModelParams};
use crate::numcore::Matrix;
use crate::preprocess::UnigramTable;
use crate::vocab::{Vocabulary, PAD_ID, UNK_ID};

pub const MAGIC: &[u8; 5] = b"ABLM1";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("cannot access checkpoint {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("checkpoint truncated at byte {offset} while reading {what}")]
    Truncated { offset: usize, what: &'static str },
    #[error("not a checkpoint (bad magic bytes)")]
    BadMagic,
    #[error("unsupported checkpoint version {found} (this reader handles {VERSION})")]
    Version { found: u32 },
    #[error("tensor {name} has shape {found}, expected {expected}")]
    Shape {
        name: String,
        expected: String,
        found: String,
    },
    #[error("checkpoint {field} is {found} but {expected} was requested")]
    Dimension {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        let v = u32::try_from(v).expect("checkpoint field fits in u32");
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }
    fn f64s(&mut self, xs: &[f64]) {
        for x in xs {
            self.0.extend_from_slice(&x.to_le_bytes());
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], CheckpointError> {
        if self.buf.len() - self.pos < n {
            return Err(CheckpointError::Truncated { offset: self.buf.len(), what });
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }
    fn u8(&mut self, what: &'static str) -> Result<u8, CheckpointError> {
        Ok(self.take(1, what)?[0])
    }
    fn u32(&mut self, what: &'static str) -> Result<usize, CheckpointError> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize)
    }
    fn u64(&mut self, what: &'static str) -> Result<u64, CheckpointError> {
        let b = self.take(8, what)?;
        Ok(u64::from_le_bytes(b.try_into().expect("8 bytes")))
    }
    fn str(&mut self, what: &'static str) -> Result<String, CheckpointError> {
        let n = self.u32(what)?;
        let b = self.take(n, what)?;
        String::from_utf8(b.to_vec()).map_err(|_| CheckpointError::Malformed(format!("{what} is not UTF-8")))
    }
    fn flag(&mut self, what: &'static str) -> Result<bool, CheckpointError> {
        match self.u8(what)? {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(CheckpointError::Malformed(format!("{what} flag has value {v}"))),
        }
    }
}

/// Serializes a classifier.
pub fn encode_checkpoint(model: &Classifier) -> Vec<u8> {
    let dims = model.params.dims;
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.0.extend_from_slice(&VERSION.to_le_bytes());
    for v in [dims.vocab, dims.embed, dims.hidden, dims.attn, model.max_len] {
        w.u32(v);
    }
    w.u8(dims.bidirectional as u8);
    w.u8(dims.attention as u8);
    w.u32(Class::ALL.len());
    for c in Class::ALL {
        w.str(c.name());
    }
    let words: Vec<_> = model.vocab.entries().filter(|e| e.0 != PAD_ID && e.0 != UNK_ID).collect();
    w.u32(words.len());
    for (_, word, count) in words {
        w.str(word);
        w.u64(count);
    }
    let unigrams = model.table.sorted_entries();
    w.u32(unigrams.len());
    for (word, count) in unigrams {
        w.str(word);
        w.u64(count);
    }
    let tensors = model.params.tensors();
    w.u32(tensors.len());
    for (name, m) in tensors {
        w.str(name);
        w.u32(2);
        w.u32(m.rows());
        w.u32(m.cols());
        w.f64s(m.as_slice());
    }
    w.0
}

/// Sizes a caller insists on when loading; `None` accepts whatever is stored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExpectedDims {
    pub embed: Option<usize>,
    pub hidden: Option<usize>,
    pub attn: Option<usize>,
    pub max_len: Option<usize>,
}

/// Parses a checkpoint, checking stored sizes against `expected`.
pub fn decode_checkpoint(bytes: &[u8], expected: &ExpectedDims) -> Result<Classifier, CheckpointError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(MAGIC.len(), "magic").map_err(|_| CheckpointError::BadMagic)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.u32("version")? as u32;
    if version != VERSION {
        return Err(CheckpointError::Version { found: version });
    }
    let vocab_size = r.u32("config")?;
    let embed = r.u32("config")?;
    let hidden = r.u32("config")?;
    let attn = r.u32("config")?;
    let max_len = r.u32("config")?;
    let bidirectional = r.flag("bidirectional")?;
    let attention = r.flag("attention")?;
    let dims = ModelDims {
        vocab: vocab_size,
        embed,
        hidden,
        attn,
        bidirectional,
        attention,
    };
    for (field, want, found) in [
        ("embedding size", expected.embed, embed),
        ("hidden size", expected.hidden, hidden),
        ("attention size", expected.attn, attn),
        ("max_len", expected.max_len, max_len),
    ] {
        if let Some(want) = want.filter(|&w| w != found) {
            return Err(CheckpointError::Dimension {
                field,
                expected: want,
                found,
            });
        }
    }

    let n_classes = r.u32("class order")?;
    let classes: Vec<String> = (0..n_classes).map(|_| r.str("class order")).collect::<Result<_, _>>()?;
    let ours: Vec<&str> = Class::ALL.iter().map(|c| c.name()).collect();
    if classes != ours {
        return Err(CheckpointError::Malformed(format!("class order {classes:?}, expected {ours:?}")));
    }

    let n_words = r.u32("vocabulary")?;
    let mut entries = Vec::with_capacity(n_words.min(1 << 20));
    for _ in 0..n_words {
        let word = r.str("vocabulary")?;
        let count = r.u64("vocabulary")?;
        entries.push((word, count));
    }
    let vocab = Vocabulary::from_entries(entries).map_err(|e| CheckpointError::Malformed(e.to_string()))?;
    if vocab.len() != vocab_size {
        return Err(CheckpointError::Malformed(format!(
            "vocabulary has {} entries, config says {vocab_size}",
            vocab.len()
        )));
    }

    let n_uni = r.u32("unigram table")?;
    let mut table = UnigramTable::new();
    for _ in 0..n_uni {
        let word = r.str("unigram table")?;
        let count = r.u64("unigram table")?;
        table.add(&word, count);
    }

    // Refuse absurd headers before allocating anything.
    let floats_left = (bytes.len() - r.pos) / 8;
    let sane = [vocab_size, embed, hidden, attn].iter().all(|&d| d <= floats_left)
        && vocab_size.checked_mul(embed).is_some_and(|n| n <= floats_left)
        && (4 * hidden).checked_mul(embed + hidden).is_some_and(|n| n <= floats_left);
    if !sane {
        return Err(CheckpointError::Truncated {
            offset: bytes.len(),
            what: "tensor data",
        });
    }
    let mut params = ModelParams::zeros(dims);
    let n_tensors = r.u32("tensor count")?;
    if n_tensors != params.tensor_count() {
        return Err(CheckpointError::Malformed(format!(
            "{n_tensors} tensors, expected {}",
            params.tensor_count()
        )));
    }
    for (name, m) in params.tensors_mut() {
        let stored = r.str("tensor name")?;
        if stored != name {
            return Err(CheckpointError::Malformed(format!("tensor {stored:?} where {name} was expected")));
        }
        let rank = r.u32("tensor rank")?;
        let shape: Vec<usize> = (0..rank).map(|_| r.u32("tensor dims")).collect::<Result<_, _>>()?;
        if shape != [m.rows(), m.cols()] {
            return Err(CheckpointError::Shape {
                name: name.to_string(),
                expected: format!("{}x{}", m.rows(), m.cols()),
                found: shape.iter().map(usize::to_string).collect::<Vec<_>>().join("x"),
            });
        }
        let n = m.len();
        let data = r.take(n * 8, "tensor data")?;
        let values: Vec<f64> = data
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        *m = Matrix::new(m.rows(), m.cols(), values).expect("sized above");
    }
    if r.pos != bytes.len() {
        return Err(CheckpointError::Malformed(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    Ok(Classifier {
        params,
        vocab,
        table,
        max_len,
    })
}

pub fn save_checkpoint(model: &Classifier, path: &Path) -> Result<(), CheckpointError> {
    std::fs::write(path, encode_checkpoint(model)).map_err(|source| CheckpointError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_checkpoint(path: &Path, expected: &ExpectedDims) -> Result<Classifier, CheckpointError> {
    let bytes = std::fs::read(path).map_err(|source| CheckpointError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_checkpoint(&bytes, expected)
}
