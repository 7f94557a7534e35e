//! Text cleaning: normalization, tokenization, elongation collapsing, word
//! segmentation and spelling correction, applied in that order.

mod normalize;
mod segment;
mod spelling;
mod unigram;

pub use normalize::{collapse_elongation, normalize, tokenize, URL_TOKEN, USER_TOKEN};
pub use segment::{piece_log_score, segment_with_score, segment_word, MAX_PIECE_LEN, MAX_SEGMENT_INPUT};
pub use spelling::correct_spelling;
pub use unigram::{UnigramError, UnigramTable};

/// A raw post and where it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawText {
    pub text: String,
    pub source_id: String,
}

impl RawText {
    pub fn new(text: impl Into<String>, source_id: impl Into<String>) -> Self {
        let source_id = source_id.into();
        RawText {
            text: text.into(),
            source_id: if source_id.is_empty() {
                "-".to_string()
            } else {
                source_id
            },
        }
    }
}

/// Ordered, non-empty, whitespace-free tokens.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TokenSequence {
    tokens: Vec<String>,
}

impl TokenSequence {
    /// Wraps tokens, splitting any that contain whitespace and dropping empties.
    pub fn new<S: AsRef<str>>(tokens: impl IntoIterator<Item = S>) -> Self {
        let tokens = tokens
            .into_iter()
            .flat_map(|t| {
                t.as_ref()
                    .split_whitespace()
                    .map(str::to_string)
                    .collect::<Vec<_>>()
            })
            .collect();
        TokenSequence { tokens }
    }

    pub(crate) fn from_normalized(tokens: Vec<String>) -> Self {
        debug_assert!(tokens.iter().all(|t| !t.is_empty()));
        TokenSequence { tokens }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }

    /// Tokens joined by single spaces.
    pub fn join(&self) -> String {
        self.tokens.join(" ")
    }
}

impl IntoIterator for TokenSequence {
    type Item = String;
    type IntoIter = std::vec::IntoIter<String>;

    fn into_iter(self) -> Self::IntoIter {
        self.tokens.into_iter()
    }
}

/// Segmentation and correction only apply to purely alphabetic tokens;
/// punctuation, placeholders and contractions pass through.
fn is_word(token: &str) -> bool {
    token.chars().all(char::is_alphabetic)
}

/// Runs the full cleaning pipeline on `text`.
pub fn run_pipeline_text(text: &str, table: &UnigramTable) -> TokenSequence {
    let mut out = Vec::new();
    for token in tokenize(&normalize(text)) {
        let token = collapse_elongation(&token);
        if !is_word(&token) {
            out.push(token);
            continue;
        }
        for piece in segment_word(&token, table) {
            out.push(correct_spelling(&piece, table));
        }
    }
    TokenSequence::from_normalized(out)
}

pub fn run_pipeline(raw: &RawText, table: &UnigramTable) -> TokenSequence {
    run_pipeline_text(&raw.text, table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> UnigramTable {
        UnigramTable::from_counts([
            ("you", 40),
            ("a", 60),
            ("stupid", 50),
            ("person", 40),
            ("per", 5),
            ("son", 5),
            ("so", 30),
            ("cool", 8),
            ("the", 10_000),
        ])
    }

    #[test]
    fn pipeline_example() {
        let out = run_pipeline(&RawText::new("You're a STUPIDPERSON!!!", "t1"), &table());
        assert_eq!(out.tokens(), ["you're", "a", "stupid", "person", "!!"]);
    }

    #[test]
    fn pipeline_empty() {
        assert!(run_pipeline(&RawText::new("", "t"), &table()).is_empty());
    }

    #[test]
    fn pipeline_repairs_elongation_residue() {
        let out = run_pipeline_text("soooo coooool", &table());
        assert_eq!(out.tokens(), ["so", "cool"]);
    }

    #[test]
    fn pipeline_is_idempotent_on_fixtures() {
        let t = table();
        for text in [
            "You're a STUPIDPERSON!!!",
            "soooo coooool @bob http://t.co/x #stupid",
            "  per son   personn!?",
            "",
        ] {
            let once = run_pipeline_text(text, &t);
            let twice = run_pipeline_text(&once.join(), &t);
            assert_eq!(once, twice, "{text:?}");
            assert_eq!(run_pipeline_text(text, &t), once);
        }
    }

    #[test]
    fn raw_text_source_id_never_empty() {
        assert_eq!(RawText::new("x", "").source_id, "-");
    }
}
