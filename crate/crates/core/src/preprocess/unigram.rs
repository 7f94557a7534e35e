use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum UnigramError {
    #[error("cannot read unigram table: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: expected `word count`, got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("line {line}: count must be a positive integer")]
    BadCount { line: usize },
}

/// Word frequencies used by segmentation and spelling correction.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UnigramTable {
    counts: HashMap<String, u64>,
    total: u64,
    alphabet: BTreeSet<char>,
}

impl UnigramTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `count` occurrences of `word`. Zero counts and empty words are ignored.
    pub fn add(&mut self, word: &str, count: u64) {
        if count == 0 || word.is_empty() {
            return;
        }
        *self.counts.entry(word.to_string()).or_insert(0) += count;
        self.total += count;
        self.alphabet.extend(word.chars());
    }

    /// Adds `word` with count 1 unless it is already present.
    pub fn add_if_absent(&mut self, word: &str) {
        if !self.counts.contains_key(word) {
            self.add(word, 1);
        }
    }

    pub fn from_counts<'a>(pairs: impl IntoIterator<Item = (&'a str, u64)>) -> Self {
        let mut table = UnigramTable::new();
        for (w, c) in pairs {
            table.add(w, c);
        }
        table
    }

    pub fn count(&self, word: &str) -> Option<u64> {
        self.counts.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.counts.contains_key(word)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Characters occurring in any stored word, in sorted order.
    pub fn alphabet(&self) -> impl Iterator<Item = char> + '_ {
        self.alphabet.iter().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(w, &c)| (w.as_str(), c))
    }

    /// Entries sorted by word, for stable serialization.
    pub fn sorted_entries(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_unstable_by(|a, b| a.0.cmp(b.0));
        v
    }

    /// Parses `word count` lines. Blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, UnigramError> {
        let mut table = UnigramTable::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(word), Some(count), None) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(UnigramError::Malformed {
                    line: idx + 1,
                    text: raw.to_string(),
                });
            };
            let count: u64 = count
                .parse()
                .ok()
                .filter(|&c| c > 0)
                .ok_or(UnigramError::BadCount { line: idx + 1 })?;
            table.add(word, count);
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, UnigramError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        for (word, count) in self.sorted_entries() {
            writeln!(w, "{word} {count}")?;
        }
        Ok(())
    }
}
