use std::f64::consts::LN_10;

use super::UnigramTable;

/// Tokens longer than this are returned unsplit.
pub const MAX_SEGMENT_INPUT: usize = 64;
/// Longest piece the dynamic program considers (besides the whole token).
pub const MAX_PIECE_LEN: usize = 20;

/// Log-probability of one piece: `ln(count / total)` for a known word and
/// `ln(10^-L / total)` for an unknown piece of `L` characters.
pub fn piece_log_score(piece: &str, table: &UnigramTable) -> f64 {
    let total = table.total() as f64;
    match table.count(piece) {
        Some(c) => (c as f64 / total).ln(),
        None => -(piece.chars().count() as f64) * LN_10 - total.ln(),
    }
}

/// Splits a concatenated token into the pieces maximizing the product of
/// unigram probabilities. Returns the pieces and the log score of the split.
pub fn segment_with_score(token: &str, table: &UnigramTable) -> (Vec<String>, f64) {
    let chars: Vec<char> = token.chars().collect();
    let n = chars.len();
    if n == 0 || n > MAX_SEGMENT_INPUT || table.is_empty() {
        let score = if table.is_empty() || n == 0 {
            f64::NEG_INFINITY
        } else {
            piece_log_score(token, table)
        };
        return (vec![token.to_string()], score);
    }
    // Byte offset of every char boundary, so pieces slice the original string.
    let offsets: Vec<usize> = token
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(token.len()))
        .collect();

    let mut best = vec![f64::NEG_INFINITY; n + 1];
    let mut back = vec![0usize; n + 1];
    best[0] = 0.0;
    for end in 1..=n {
        let lo = end.saturating_sub(MAX_PIECE_LEN);
        let starts = (lo..end).chain((lo > 0 && end == n).then_some(0));
        for start in starts {
            let piece = &token[offsets[start]..offsets[end]];
            let score = best[start] + piece_log_score(piece, table);
            if score > best[end] {
                best[end] = score;
                back[end] = start;
            }
        }
    }

    let mut pieces = Vec::new();
    let mut end = n;
    while end > 0 {
        let start = back[end];
        pieces.push(token[offsets[start]..offsets[end]].to_string());
        end = start;
    }
    pieces.reverse();
    (pieces, best[n])
}

pub fn segment_word(token: &str, table: &UnigramTable) -> Vec<String> {
    segment_with_score(token, table).0
}
