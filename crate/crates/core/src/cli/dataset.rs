use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{Class, NUM_CLASSES};
use crate::preprocess::{collapse_elongation, normalize, run_pipeline_text, tokenize, TokenSequence, UnigramTable};
use crate::trainer::{Dataset, LabeledExample};
use crate::vocab::Vocabulary;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub label: Class,
    pub text: String,
}

/// One rejected line of a dataset file.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LineError {
    #[error("line {line}: unknown label {label:?}")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: expected label<TAB>text")]
    MissingTab { line: usize },
    #[error("line {line}: empty text")]
    EmptyText { line: usize },
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read dataset {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("dataset {path} has no valid records ({rejected} lines rejected)")]
    NoRecords { path: PathBuf, rejected: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetFile {
    pub path: PathBuf,
    pub records: Vec<Record>,
    pub errors: Vec<LineError>,
}

impl DatasetFile {
    /// Parses `label<TAB>text` lines; blank lines are skipped.
    pub fn parse(path: impl Into<PathBuf>, text: &str) -> Result<Self, DatasetError> {
        let path = path.into();
        let mut records = Vec::new();
        let mut errors = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let Some((label, body)) = line.split_once('\t') else {
                errors.push(LineError::MissingTab { line: line_no });
                continue;
            };
            let Ok(label) = label.trim().parse::<Class>() else {
                errors.push(LineError::UnknownLabel {
                    line: line_no,
                    label: label.to_string(),
                });
                continue;
            };
            let body = body.trim();
            if body.is_empty() {
                errors.push(LineError::EmptyText { line: line_no });
                continue;
            }
            records.push(Record {
                label,
                text: body.to_string(),
            });
        }
        if records.is_empty() {
            return Err(DatasetError::NoRecords {
                path,
                rejected: errors.len(),
            });
        }
        Ok(DatasetFile { path, records, errors })
    }

    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(path, &text)
    }

    pub fn summary(&self) -> ClassSummary {
        ClassSummary::of(&self.records)
    }
}

/// Per-class counts and percentages.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassSummary {
    pub counts: [usize; NUM_CLASSES],
}

impl ClassSummary {
    pub fn of(records: &[Record]) -> Self {
        let mut counts = [0; NUM_CLASSES];
        for r in records {
            counts[r.label.index()] += 1;
        }
        ClassSummary { counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn percentage(&self, class: Class) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            100.0 * self.counts[class.index()] as f64 / total as f64
        }
    }
}

impl fmt::Display for ClassSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<10} {:>8} {:>11}", "Labels", "Number", "Percentage")?;
        for c in Class::ALL {
            let name = c.name();
            let title = format!("{}{}", name[..1].to_uppercase(), &name[1..]);
            writeln!(f, "{title:<10} {:>8} {:>10.1}%", self.counts[c.index()], self.percentage(c))?;
        }
        writeln!(f, "{:<10} {:>8} {:>10.1}%", "Total", self.total(), 100.0)
    }
}

/// Word counts of the normalized corpus, used for segmentation and
/// spelling correction. Only purely alphabetic tokens are counted.
pub fn unigram_from_texts<'a>(texts: impl IntoIterator<Item = &'a str>) -> UnigramTable {
    let mut table = UnigramTable::new();
    for text in texts {
        for tok in tokenize(&normalize(text)) {
            let tok = collapse_elongation(&tok);
            if !tok.is_empty() && tok.chars().all(char::is_alphabetic) {
                table.add(&tok, 1);
            }
        }
    }
    table
}

/// Cleans every record's text.
pub fn clean_records(records: &[Record], table: &UnigramTable) -> Vec<(Class, TokenSequence)> {
    records
        .iter()
        .map(|r| (r.label, run_pipeline_text(&r.text, table)))
        .collect()
}

/// Encodes cleaned records, dropping those left without tokens.
pub fn encode_records(cleaned: &[(Class, TokenSequence)], vocab: &Vocabulary, max_len: usize) -> Dataset {
    cleaned
        .iter()
        .filter(|(_, t)| !t.is_empty())
        .map(|(label, tokens)| LabeledExample {
            seq: vocab.encode(tokens, max_len),
            label: *label,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_valid_lines() {
        let f = DatasetFile::parse("x.tsv", "abusive\tyou suck\n\nnormal\tnice day  \n").unwrap();
        assert_eq!(
            f.records[0],
            Record {
                label: Class::Abusive,
                text: "you suck".into()
            }
        );
        assert_eq!(f.records[1].text, "nice day");
        assert!(f.errors.is_empty());
    }

    #[test]
    fn collects_line_errors() {
        let f = DatasetFile::parse("x.tsv", "angry\thi\nspam\tbuy\nno tab here\nhateful\t   \n").unwrap();
        assert_eq!(f.records.len(), 1);
        assert_eq!(
            f.errors,
            [
                LineError::UnknownLabel {
                    line: 1,
                    label: "angry".into()
                },
                LineError::MissingTab { line: 3 },
                LineError::EmptyText { line: 4 },
            ]
        );
        assert_eq!(f.errors[0].to_string(), "line 1: unknown label \"angry\"");
    }

    #[test]
    fn no_valid_records_is_an_error() {
        assert!(matches!(
            DatasetFile::parse("x.tsv", "angry\thi\n"),
            Err(DatasetError::NoRecords { rejected: 1, .. })
        ));
    }

    #[test]
    fn summary_percentages_sum_to_hundred() {
        let text = "normal\ta\nnormal\tb\nspam\tc\nhateful\td\nabusive\te\nabusive\tf\nnormal\tg\n";
        let s = DatasetFile::parse("x.tsv", text).unwrap().summary();
        assert_eq!(s.counts, [3, 1, 1, 2]);
        let sum: f64 = Class::ALL.iter().map(|&c| s.percentage(c)).sum();
        assert!((sum - 100.0).abs() < 0.1);
        let table = s.to_string();
        assert!(table.contains("Normal"));
        assert!(table.lines().nth(1).unwrap().contains("42.9%"));
    }

    #[test]
    fn unigram_counts_alphabetic_tokens() {
        let t = unigram_from_texts(["Sooo happy!! @bob http://x.co", "happy day"]);
        assert_eq!(t.count("happy"), Some(2));
        assert_eq!(t.count("soo"), Some(1));
        assert!(!t.contains("<user>"));
    }
}
