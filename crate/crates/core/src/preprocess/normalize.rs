use std::sync::OnceLock;

use regex::Regex;

use super::TokenSequence;

pub const URL_TOKEN: &str = "<url>";
pub const USER_TOKEN: &str = "<user>";

fn url_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?:https?://|www\.)\S+").unwrap())
}

fn mention_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(^|\s)@\w+").unwrap())
}

fn hashtag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(^|\s)#+(\w)").unwrap())
}

/// Lowercases, replaces URLs and mentions with placeholder tokens, strips
/// hashtag markers and collapses whitespace.
pub fn normalize(text: &str) -> String {
    let lower = text.to_lowercase();
    let no_urls = url_re().replace_all(&lower, URL_TOKEN);
    let no_users = mention_re().replace_all(&no_urls, "${1}<user>");
    let no_tags = hashtag_re().replace_all(&no_users, "${1}${2}");
    no_tags.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn is_punct(c: char) -> bool {
    !c.is_alphanumeric()
}

/// Splits normalized text on whitespace and peels leading and trailing
/// punctuation runs off each chunk as separate tokens.
pub fn tokenize(text: &str) -> TokenSequence {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        if chunk == URL_TOKEN || chunk == USER_TOKEN || chunk.chars().all(is_punct) {
            tokens.push(chunk.to_string());
            continue;
        }
        let start = chunk
            .char_indices()
            .find(|&(_, c)| !is_punct(c))
            .map_or(0, |(i, _)| i);
        let end = chunk
            .char_indices()
            .rev()
            .find(|&(_, c)| !is_punct(c))
            .map_or(chunk.len(), |(i, c)| i + c.len_utf8());
        if start > 0 {
            tokens.push(chunk[..start].to_string());
        }
        tokens.push(chunk[start..end].to_string());
        if end < chunk.len() {
            tokens.push(chunk[end..].to_string());
        }
    }
    TokenSequence::from_normalized(tokens)
}

/// Shortens every run of three or more identical characters to two.
pub fn collapse_elongation(token: &str) -> String {
    let mut out = String::with_capacity(token.len());
    let mut prev = None;
    let mut run = 0;
    for c in token.chars() {
        if Some(c) == prev {
            run += 1;
        } else {
            prev = Some(c);
            run = 1;
        }
        if run <= 2 {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize("  THAT   is RUDE "), "that is rude");
        assert_eq!(
            normalize("see http://x.co @john #stupid"),
            "see <url> <user> stupid"
        );
        assert_eq!(normalize(""), "");
        assert_eq!(normalize("Visit WWW.Example.com/x now"), "visit <url> now");
        assert_eq!(normalize("mail a@b.com"), "mail a@b.com");
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("that is rude").tokens(), ["that", "is", "rude"]);
        assert_eq!(tokenize("rude!!").tokens(), ["rude", "!!"]);
        assert!(tokenize("").is_empty());
        assert_eq!(
            tokenize("\"you're\" <url> ...").tokens(),
            ["\"", "you're", "\"", "<url>", "..."]
        );
    }

    #[test]
    fn collapse_examples() {
        assert_eq!(collapse_elongation("coooool"), "cool");
        assert_eq!(collapse_elongation("soooo"), "soo");
        assert_eq!(collapse_elongation("cool"), "cool");
        assert_eq!(collapse_elongation("!!!!"), "!!");
    }

    proptest! {
        #[test]
        fn normalize_has_no_uppercase_or_double_space(s in "[ a-zA-Z@#:/.!\t]{0,40}") {
            let n = normalize(&s);
            prop_assert!(!n.chars().any(char::is_uppercase));
            prop_assert!(!n.contains("  "));
            prop_assert_eq!(n.trim(), n.as_str());
        }

        #[test]
        fn collapse_never_leaves_triples(s in "[abc!]{1,30}") {
            let out = collapse_elongation(&s);
            prop_assert!(out.len() <= s.len());
            let chars: Vec<char> = out.chars().collect();
            prop_assert!(chars.windows(3).all(|w| !(w[0] == w[1] && w[1] == w[2])));
        }

        #[test]
        fn tokens_have_no_whitespace(s in "[a-z!?.' ]{0,40}") {
            let toks = tokenize(&normalize(&s));
            prop_assert!(toks.tokens().iter().all(|t| !t.is_empty() && !t.contains(char::is_whitespace)));
        }
    }
}
