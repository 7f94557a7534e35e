use std::collections::HashSet;

use super::UnigramTable;

/// All strings one insertion, deletion or substitution away from `word`,
/// drawing new characters from the table's alphabet.
fn edits1(word: &[char], alphabet: &[char]) -> HashSet<String> {
    let mut out = HashSet::new();
    let n = word.len();
    let render = |v: &[char]| v.iter().collect::<String>();
    let mut buf = Vec::with_capacity(n + 1);
    for i in 0..n {
        buf.clear();
        buf.extend_from_slice(&word[..i]);
        buf.extend_from_slice(&word[i + 1..]);
        out.insert(render(&buf));
    }
    for i in 0..n {
        for &c in alphabet {
            if c == word[i] {
                continue;
            }
            buf.clear();
            buf.extend_from_slice(word);
            buf[i] = c;
            out.insert(render(&buf));
        }
    }
    for i in 0..=n {
        for &c in alphabet {
            buf.clear();
            buf.extend_from_slice(&word[..i]);
            buf.push(c);
            buf.extend_from_slice(&word[i..]);
            out.insert(render(&buf));
        }
    }
    out
}

/// Keeps the better of two candidates: higher count, then lexicographically smaller.
fn better<'a>(best: Option<(&'a str, u64)>, cand: (&'a str, u64)) -> Option<(&'a str, u64)> {
    match best {
        Some((w, c)) if c > cand.1 || (c == cand.1 && w <= cand.0) => Some((w, c)),
        _ => Some(cand),
    }
}

/// Corrects an out-of-table token to the most frequent table word within
/// edit distance 1, falling back to distance 2, else returns it unchanged.
pub fn correct_spelling(token: &str, table: &UnigramTable) -> String {
    if token.is_empty() || table.contains(token) {
        return token.to_string();
    }
    let chars: Vec<char> = token.chars().collect();
    let alphabet: Vec<char> = table.alphabet().collect();

    let first = edits1(&chars, &alphabet);
    let mut best = None;
    for cand in &first {
        if let Some(c) = table.count(cand) {
            best = better(best, (cand.as_str(), c));
        }
    }
    if let Some((w, _)) = best {
        return w.to_string();
    }

    let mut best: Option<(String, u64)> = None;
    for e1 in &first {
        let e1_chars: Vec<char> = e1.chars().collect();
        for cand in edits1(&e1_chars, &alphabet) {
            if let Some(c) = table.count(&cand) {
                let keep = match &best {
                    Some((w, bc)) => *bc > c || (*bc == c && *w <= cand),
                    None => false,
                };
                if !keep {
                    best = Some((cand, c));
                }
            }
        }
    }
    best.map_or_else(|| token.to_string(), |(w, _)| w)
}
