//! Vocabulary construction, GloVe loading, embedding matrices and
//! fixed-length integer encodings.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use thiserror::Error;

use crate::error::EmbeddingError;
use crate::numcore::{Matrix, RngStream};
use crate::preprocess::TokenSequence;

pub const PAD: &str = "<pad>";
pub const UNK: &str = "<unk>";
pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;

/// Half-width of the uniform range for rows without a pretrained vector.
pub const OOV_INIT_RANGE: f64 = 0.05;

/// Word ↔ id mapping. Ids 0 and 1 are reserved for padding and unknown words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    word_to_id: HashMap<String, usize>,
    id_to_word: Vec<String>,
    counts: Vec<u64>,
}

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("vocabulary I/O: {0}")]
    Io(#[from] io::Error),
    #[error("vocabulary line {line}: {reason}")]
    Format { line: usize, reason: String },
}

impl Default for Vocabulary {
    fn default() -> Self {
        Vocabulary {
            word_to_id: HashMap::from([(PAD.to_string(), PAD_ID), (UNK.to_string(), UNK_ID)]),
            id_to_word: vec![PAD.to_string(), UNK.to_string()],
            counts: vec![0, 0],
        }
    }
}

impl Vocabulary {
    /// Builds a vocabulary of every word with frequency `>= min_count`, ids
    /// assigned by descending frequency and then lexicographically.
    pub fn build(corpus: &[TokenSequence], min_count: usize) -> Self {
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for seq in corpus {
            for tok in seq.iter() {
                *freq.entry(tok).or_insert(0) += 1;
            }
        }
        let mut words: Vec<(&str, u64)> = freq
            .into_iter()
            .filter(|&(w, c)| c >= min_count.max(1) as u64 && w != PAD && w != UNK)
            .collect();
        words.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

        let mut vocab = Vocabulary::default();
        for (w, c) in words {
            vocab.push(w.to_string(), c);
        }
        vocab
    }

    fn push(&mut self, word: String, count: u64) {
        self.word_to_id.insert(word.clone(), self.id_to_word.len());
        self.id_to_word.push(word);
        self.counts.push(count);
    }

    /// Rebuilds a vocabulary from `(word, count)` pairs in id order, starting at id 2.
    pub fn from_entries(entries: impl IntoIterator<Item = (String, u64)>) -> Result<Self, VocabError> {
        let mut vocab = Vocabulary::default();
        for (i, (w, c)) in entries.into_iter().enumerate() {
            if w.is_empty() || vocab.word_to_id.contains_key(&w) {
                return Err(VocabError::Format {
                    line: i + 3,
                    reason: format!("duplicate or empty word {w:?}"),
                });
            }
            vocab.push(w, c);
        }
        Ok(vocab)
    }

    pub fn len(&self) -> usize {
        self.id_to_word.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.word_to_id.get(word).copied()
    }

    pub fn id_or_unk(&self, word: &str) -> usize {
        self.id(word).unwrap_or(UNK_ID)
    }

    pub fn word(&self, id: usize) -> Option<&str> {
        self.id_to_word.get(id).map(String::as_str)
    }

    pub fn count(&self, id: usize) -> u64 {
        self.counts.get(id).copied().unwrap_or(0)
    }

    /// `(id, word, count)` for every entry including the reserved ones.
    pub fn entries(&self) -> impl Iterator<Item = (usize, &str, u64)> {
        self.id_to_word
            .iter()
            .zip(&self.counts)
            .enumerate()
            .map(|(i, (w, &c))| (i, w.as_str(), c))
    }

    /// Writes `id<TAB>word<TAB>count` lines.
    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        for (id, word, count) in self.entries() {
            writeln!(w, "{id}\t{word}\t{count}")?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, VocabError> {
        let mut entries = Vec::new();
        for (idx, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
            let fields: Vec<&str> = line.split('\t').collect();
            let bad = |reason: &str| VocabError::Format {
                line: idx + 1,
                reason: reason.to_string(),
            };
            let [id, word, count] = fields[..] else {
                return Err(bad("expected id<TAB>word<TAB>count"));
            };
            let id: usize = id.parse().map_err(|_| bad("bad id"))?;
            let count: u64 = count.parse().map_err(|_| bad("bad count"))?;
            let expected = entries.len() + 2;
            match id {
                PAD_ID if word == PAD => continue,
                UNK_ID if word == UNK => continue,
                _ if id == expected => entries.push((word.to_string(), count)),
                _ => return Err(bad(&format!("expected id {expected}, got {id}"))),
            }
        }
        Vocabulary::from_entries(entries)
    }

    /// Ids of `tokens`, padded with `PAD_ID` or truncated at the tail to `max_len`.
    pub fn encode(&self, tokens: &TokenSequence, max_len: usize) -> EncodedSequence {
        let mut ids: Vec<usize> = tokens
            .iter()
            .take(max_len)
            .map(|t| self.id_or_unk(t))
            .collect();
        let true_length = ids.len();
        ids.resize(max_len, PAD_ID);
        EncodedSequence { ids, true_length }
    }

    /// Words for the non-pad positions of `seq`.
    pub fn decode(&self, seq: &EncodedSequence) -> Vec<&str> {
        seq.tokens()
            .iter()
            .map(|&id| self.word(id).unwrap_or(UNK))
            .collect()
    }
}

/// Fixed-length id sequence; positions at and after `true_length` are padding.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EncodedSequence {
    ids: Vec<usize>,
    true_length: usize,
}

impl EncodedSequence {
    /// Builds a sequence from already-padded ids. `true_length` is clamped to
    /// `ids.len()` and positions past it are forced to `PAD_ID`.
    pub fn new(mut ids: Vec<usize>, true_length: usize) -> Self {
        let true_length = true_length.min(ids.len());
        ids[true_length..].iter_mut().for_each(|v| *v = PAD_ID);
        EncodedSequence { ids, true_length }
    }

    /// Unpadded sequence of exactly `tokens`.
    pub fn from_ids(tokens: Vec<usize>) -> Self {
        let true_length = tokens.len();
        EncodedSequence {
            ids: tokens,
            true_length,
        }
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    /// The non-pad prefix.
    pub fn tokens(&self) -> &[usize] {
        &self.ids[..self.true_length]
    }

    pub fn true_length(&self) -> usize {
        self.true_length
    }

    pub fn max_len(&self) -> usize {
        self.ids.len()
    }
}

/// Vectors parsed from a GloVe-format text file.
#[derive(Clone, Debug, Default)]
pub struct GloveVectors {
    pub dim: usize,
    pub vectors: HashMap<String, Vec<f64>>,
    /// Lines skipped for wrong arity or unparsable numbers.
    pub skipped: usize,
}

impl GloveVectors {
    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Parses `word v1 ... vd` lines from a reader.
    pub fn read(reader: impl BufRead, dim: usize) -> io::Result<Self> {
        let mut out = GloveVectors {
            dim,
            ..Default::default()
        };
        for line in reader.lines() {
            let line = line?;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(' ');
            let word = parts.next().unwrap_or_default();
            let values: Result<Vec<f64>, _> = parts.map(str::parse::<f64>).collect();
            match values {
                Ok(v) if !word.is_empty() && v.len() == dim && v.iter().all(|x| x.is_finite()) => {
                    out.vectors.insert(word.to_string(), v);
                }
                _ => out.skipped += 1,
            }
        }
        Ok(out)
    }
}

/// Loads a GloVe text file of dimension `dim`.
pub fn load_glove(path: &Path, dim: usize) -> Result<GloveVectors, EmbeddingError> {
    let load_err = |source| EmbeddingError::Load {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(load_err)?;
    let glove = GloveVectors::read(BufReader::new(file), dim).map_err(load_err)?;
    if glove.is_empty() {
        return Err(EmbeddingError::Empty(path.to_path_buf()));
    }
    Ok(glove)
}

/// `V x d` embedding table aligned with a [`Vocabulary`].
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrix {
    pub matrix: Matrix,
    /// Vocabulary rows (excluding pad and unk) initialized from GloVe.
    pub pretrained_rows: usize,
}

impl EmbeddingMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    /// Wraps an existing matrix, checking its row count and the zero pad row.
    pub fn from_matrix(matrix: Matrix, vocab: &Vocabulary) -> Result<Self, EmbeddingError> {
        if matrix.rows() != vocab.len() {
            return Err(EmbeddingError::Dimension {
                expected: vocab.len(),
                found: matrix.rows(),
            });
        }
        let mut matrix = matrix;
        matrix.row_mut(PAD_ID).fill(0.0);
        Ok(EmbeddingMatrix {
            matrix,
            pretrained_rows: 0,
        })
    }
}

/// Copies GloVe rows for known words, zeros the pad row, and draws every
/// other row uniformly from `[-0.05, 0.05)`.
pub fn build_embedding(
    vocab: &Vocabulary,
    glove: &GloveVectors,
    dim: usize,
    seed: u64,
) -> Result<EmbeddingMatrix, EmbeddingError> {
    if let Some(bad) = glove.vectors.values().find(|v| v.len() != dim) {
        return Err(EmbeddingError::Dimension {
            expected: dim,
            found: bad.len(),
        });
    }
    if !glove.is_empty() && glove.dim != dim {
        return Err(EmbeddingError::Dimension {
            expected: dim,
            found: glove.dim,
        });
    }
    let mut rng = RngStream::new(seed);
    let mut matrix = Matrix::zeros(vocab.len(), dim);
    let mut pretrained_rows = 0;
    for (id, word, _) in vocab.entries() {
        if id == PAD_ID {
            continue;
        }
        let row = matrix.row_mut(id);
        match glove.get(word).filter(|_| id != UNK_ID) {
            Some(v) => {
                row.copy_from_slice(v);
                pretrained_rows += 1;
            }
            None => row
                .iter_mut()
                .for_each(|x| *x = rng.uniform(-OOV_INIT_RANGE, OOV_INIT_RANGE)),
        }
    }
    Ok(EmbeddingMatrix {
        matrix,
        pretrained_rows,
    })
}

/// Fraction of corpus tokens that have a GloVe vector, in `[0, 1]`.
/// An empty corpus has coverage 0.
pub fn glove_coverage(corpus: &[TokenSequence], glove: &GloveVectors) -> f64 {
    let (mut hit, mut total) = (0usize, 0usize);
    for tok in corpus.iter().flat_map(TokenSequence::iter) {
        total += 1;
        if glove.vectors.contains_key(tok) {
            hit += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        hit as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn seq(words: &[&str]) -> TokenSequence {
        TokenSequence::new(words.iter().copied())
    }

    #[test]
    fn build_orders_by_frequency() {
        let v = Vocabulary::build(&[seq(&["a", "b", "a"])], 1);
        assert_eq!(v.id(PAD), Some(0));
        assert_eq!(v.id(UNK), Some(1));
        assert_eq!(v.id("a"), Some(2));
        assert_eq!(v.id("b"), Some(3));
        assert_eq!(v.len(), 4);
    }

    #[test]
    fn min_count_excludes_rare_words() {
        let v = Vocabulary::build(&[seq(&["a", "b", "a"])], 2);
        assert_eq!(v.id("b"), None);
        let enc = v.encode(&seq(&["b", "a"]), 2);
        assert_eq!(enc.ids(), &[UNK_ID, 2]);
    }

    #[test]
    fn build_is_deterministic_with_ties() {
        let corpus = [seq(&["z", "y", "x", "w", "y", "z"])];
        let a = Vocabulary::build(&corpus, 1);
        let b = Vocabulary::build(&corpus, 1);
        assert_eq!(a, b);
        assert_eq!(a.word(2), Some("y"));
        assert_eq!(a.word(3), Some("z"));
        assert_eq!(a.word(4), Some("w"));
    }

    #[test]
    fn encode_pads_and_truncates() {
        let v = Vocabulary::build(&[seq(&["i", "i", "i", "hate", "hate", "you"])], 1);
        let e = v.encode(&seq(&["i", "hate", "you"]), 5);
        assert_eq!(e.ids(), &[2, 3, 4, 0, 0]);
        assert_eq!(e.true_length(), 3);

        let e = v.encode(&TokenSequence::default(), 3);
        assert_eq!(e.ids(), &[0, 0, 0]);
        assert_eq!(e.true_length(), 0);

        let e = v.encode(&seq(&["i", "hate", "you", "you", "hate", "i"]), 4);
        assert_eq!(e.ids(), &[2, 3, 4, 4]);
        assert_eq!(e.true_length(), 4);
    }

    #[test]
    fn encode_decode_roundtrip() {
        let corpus = [seq(&["you", "are", "so", "rude"])];
        let v = Vocabulary::build(&corpus, 1);
        let e = v.encode(&corpus[0], 10);
        assert_eq!(v.decode(&e), ["you", "are", "so", "rude"]);
    }

    #[test]
    fn vocab_file_roundtrip() {
        let v = Vocabulary::build(&[seq(&["a", "b", "a", "c"])], 1);
        let mut buf = Vec::new();
        v.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("0\t<pad>\t0\n1\t<unk>\t0\n2\ta\t2\n"));
        assert_eq!(Vocabulary::parse(&text).unwrap(), v);
        assert!(Vocabulary::parse("0\t<pad>\t0\n5\tx\t1\n").is_err());
    }

    #[test]
    fn glove_parsing() {
        let g = GloveVectors::read(Cursor::new("the 0.1 0.2 0.3\nshort 0.1 0.2\nbad x y z\n"), 3).unwrap();
        assert_eq!(g.get("the"), Some(&[0.1, 0.2, 0.3][..]));
        assert_eq!(g.len(), 1);
        assert_eq!(g.skipped, 2);
    }

    #[test]
    fn glove_file_errors() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty.txt");
        std::fs::write(&empty, "").unwrap();
        assert!(matches!(load_glove(&empty, 3), Err(EmbeddingError::Empty(_))));
        assert!(matches!(
            load_glove(&dir.path().join("missing.txt"), 3),
            Err(EmbeddingError::Load { .. })
        ));
    }

    #[test]
    fn embedding_rows() {
        let v = Vocabulary::build(&[seq(&["the", "the", "cat"])], 1);
        let g = GloveVectors::read(Cursor::new("the 1 2 3\n"), 3).unwrap();
        let e = build_embedding(&v, &g, 3, 7).unwrap();
        assert_eq!(e.rows(), v.len());
        assert_eq!(e.matrix.row(PAD_ID), &[0.0; 3]);
        assert_eq!(e.matrix.row(v.id("the").unwrap()), &[1.0, 2.0, 3.0]);
        let cat = e.matrix.row(v.id("cat").unwrap());
        assert!(cat.iter().all(|x| x.abs() <= OOV_INIT_RANGE));
        assert!(e.matrix.row(UNK_ID).iter().any(|&x| x != 0.0));
        assert_eq!(e.pretrained_rows, 1);
        assert_eq!(build_embedding(&v, &g, 3, 7).unwrap(), e);
    }

    #[test]
    fn embedding_dimension_mismatch() {
        let v = Vocabulary::build(&[seq(&["the"])], 1);
        let g = GloveVectors::read(Cursor::new("the 1 2 3\n"), 3).unwrap();
        assert!(matches!(
            build_embedding(&v, &g, 4, 0),
            Err(EmbeddingError::Dimension { expected: 4, found: 3 })
        ));
        let wrong_rows = Matrix::zeros(v.len() + 1, 3);
        assert!(EmbeddingMatrix::from_matrix(wrong_rows, &v).is_err());
    }

    #[test]
    fn coverage_in_unit_interval() {
        let g = GloveVectors::read(Cursor::new("a 1\n"), 1).unwrap();
        let c = glove_coverage(&[seq(&["a", "b", "a", "c"])], &g);
        assert_eq!(c, 0.5);
        assert_eq!(glove_coverage(&[], &g), 0.0);
    }
}
