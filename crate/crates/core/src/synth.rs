//! Seeded synthetic corpora for smoke tests, the overfit check and the
//! desk-scale ablations. Texts are plain lowercase words, so the cleaning
//! pipeline leaves them intact given a table built from the same corpus.

use crate::model::Class;
use crate::numcore::RngStream;
use crate::vocab::GloveVectors;

/// Class proportions of the desk-scale corpus: normal, spam, hateful, abusive.
pub const DESK_PROPORTIONS: [f64; 4] = [0.605, 0.138, 0.044, 0.213];
pub const DESK_SIZE: usize = 2000;

const FILLER: &[&str] = &[
    "the", "a", "and", "to", "of", "in", "is", "it", "that", "this", "for", "on", "with", "was", "just",
    "so", "but", "today", "really", "about", "what", "when", "then", "all", "out", "up", "new", "time",
    "day", "night", "week", "morning", "people", "friends", "home", "work", "school", "city", "music",
    "movie", "show", "game", "team", "coffee", "food", "dinner", "weather", "rain", "sun", "train",
    "bus", "phone", "book", "news", "story", "photo", "video", "song", "love", "like", "think", "know",
    "going", "got", "make", "see", "watch", "read", "play", "need", "want", "feel", "good", "great",
    "nice", "happy", "long", "late", "early", "tired", "busy", "still", "again", "always", "never",
    "maybe", "finally", "here", "there", "now", "later", "tonight", "weekend", "family", "kids", "dog",
    "cat", "park", "beach", "road", "shop", "market", "lunch", "party", "class", "office", "meeting",
];

const SPAM_CUES: &[&str] = &["free", "click", "win", "prize", "offer", "subscribe", "discount", "giveaway", "promo", "deal"];
const SPAM_TAILS: &[&str] = &["link", "now", "today", "bio", "cash", "followers"];
const INSULTS: &[&str] = &["idiot", "stupid", "loser", "moron", "pathetic", "clown", "dumb", "trash"];
const TARGETS: &[&str] = &["you", "your", "yourself", "ur"];
const THINGS: &[&str] = &["traffic", "weather", "game", "movie", "printer", "queue", "wifi", "update"];
const GROUPS: &[&str] = &["immigrants", "foreigners", "outsiders", "refugees", "migrants"];
const HOSTILE: &[&str] = &["ban", "deport", "expel", "banish", "hate", "remove"];
const POSITIVE: &[&str] = &["nice", "kind", "smart", "funny", "brave", "lovely"];
const INTENSIFIERS: &[&str] = &["so", "such", "really", "totally", "complete"];

fn pick<'a>(rng: &mut RngStream, words: &[&'a str]) -> &'a str {
    words[rng.below(words.len())]
}

fn filler(rng: &mut RngStream, n: usize) -> Vec<&'static str> {
    (0..n).map(|_| pick(rng, FILLER)).collect()
}

/// Places `phrase` at a random position inside `words`.
fn insert_phrase<'a>(rng: &mut RngStream, words: &mut Vec<&'a str>, phrase: &[&'a str]) {
    let at = rng.below(words.len() + 1);
    for (k, w) in phrase.iter().enumerate() {
        words.insert(at + k, w);
    }
}

/// Up to `max` filler words, to stretch the distance between cue words.
fn gap(rng: &mut RngStream, max: usize) -> Vec<&'static str> {
    let n = rng.below(max + 1);
    (0..n).map(|_| pick(rng, INTENSIFIERS)).collect()
}

fn phrase(parts: Vec<Vec<&'static str>>) -> Vec<&'static str> {
    parts.concat()
}

/// The cue phrase of `class`. Cue words are shared across classes; what
/// decides the label is who or what an insult or threat is aimed at.
fn cue(rng: &mut RngStream, class: Class) -> Vec<&'static str> {
    match class {
        Class::Normal => match rng.below(6) {
            0 => phrase(vec![vec![pick(rng, THINGS), "is"], gap(rng, 2), vec![pick(rng, INSULTS)]]),
            1 => vec!["the", pick(rng, GROUPS), "festival", "was", "great"],
            2 => vec!["do", "not", pick(rng, HOSTILE), pick(rng, THINGS)],
            3 => phrase(vec![vec![pick(rng, TARGETS), "are"], gap(rng, 2), vec![pick(rng, POSITIVE)]]),
            4 => vec![pick(rng, SPAM_CUES), pick(rng, THINGS)],
            _ => vec![pick(rng, FILLER)],
        },
        Class::Spam => match rng.below(3) {
            0 => vec![pick(rng, SPAM_CUES), pick(rng, SPAM_CUES), pick(rng, SPAM_TAILS)],
            1 => vec![pick(rng, SPAM_CUES), "now", pick(rng, SPAM_TAILS)],
            _ => vec![pick(rng, SPAM_CUES), pick(rng, SPAM_TAILS)],
        },
        Class::Hateful => match rng.below(3) {
            0 => vec![pick(rng, HOSTILE), "all", pick(rng, GROUPS)],
            1 => phrase(vec![vec![pick(rng, GROUPS), "are"], gap(rng, 2), vec![pick(rng, INSULTS)]]),
            _ => phrase(vec![vec!["all", pick(rng, GROUPS)], gap(rng, 1), vec![pick(rng, INSULTS)]]),
        },
        Class::Abusive => match rng.below(3) {
            0 => phrase(vec![vec![pick(rng, TARGETS), "are"], gap(rng, 2), vec![pick(rng, INSULTS)]]),
            1 => vec!["shut", "up", pick(rng, INSULTS)],
            _ => phrase(vec![vec![pick(rng, TARGETS)], gap(rng, 1), vec![pick(rng, INSULTS)]]),
        },
    }
}

fn sentence(rng: &mut RngStream, class: Class, min_len: usize, max_len: usize) -> String {
    let len = min_len + rng.below(max_len - min_len + 1);
    let mut words = filler(rng, len);
    let phrase = cue(rng, class);
    insert_phrase(rng, &mut words, &phrase);
    // Benign look-alikes show up in every class.
    if rng.below(3) == 0 {
        let extra = cue(rng, Class::Normal);
        insert_phrase(rng, &mut words, &extra);
    }
    words.join(" ")
}

/// 16 short examples per class, label first.
pub fn overfit_corpus() -> Vec<(Class, String)> {
    let mut rng = RngStream::new(64);
    let mut out = Vec::with_capacity(64);
    for i in 0..64 {
        let class = Class::ALL[i % 4];
        out.push((class, sentence(&mut rng, class, 3, 6)));
    }
    out
}

/// About [`DESK_SIZE`] longer examples with the class mix of
/// [`DESK_PROPORTIONS`]; `noise` is the fraction of labels replaced at random.
pub fn desk_corpus(seed: u64, size: usize, noise: f64) -> Vec<(Class, String)> {
    let mut rng = RngStream::new(seed);
    let mut labels = Vec::with_capacity(size);
    for (c, p) in Class::ALL.iter().zip(DESK_PROPORTIONS) {
        let n = (p * size as f64).round() as usize;
        labels.extend(std::iter::repeat(*c).take(n));
    }
    rng.shuffle(&mut labels);
    labels
        .into_iter()
        .map(|class| {
            let text = sentence(&mut rng, class, 8, 22);
            let label = if rng.next_f64() < noise {
                Class::ALL[rng.below(4)]
            } else {
                class
            };
            (label, text)
        })
        .collect()
}

/// Word vectors for the synthetic vocabulary: each word group shares a
/// direction plus per-word noise. Every fifth filler word is left out so
/// that some rows fall back to random initialization.
pub fn synthetic_glove(dim: usize, seed: u64) -> GloveVectors {
    let mut rng = RngStream::new(seed);
    let groups: [&[&str]; 11] = [
        FILLER, SPAM_CUES, SPAM_TAILS, INSULTS, TARGETS, THINGS, GROUPS, HOSTILE, POSITIVE, INTENSIFIERS,
        &["are", "all", "festival", "was", "great", "do", "not", "is", "shut", "up"],
    ];
    let mut glove = GloveVectors {
        dim,
        ..Default::default()
    };
    for (g, words) in groups.iter().enumerate() {
        let centre: Vec<f64> = (0..dim).map(|_| rng.uniform(-0.5, 0.5)).collect();
        for (k, w) in words.iter().enumerate() {
            if g == 0 && k % 5 == 4 {
                continue;
            }
            let v = centre.iter().map(|c| c + rng.uniform(-0.25, 0.25)).collect();
            glove.vectors.entry(w.to_string()).or_insert(v);
        }
    }
    glove
}

/// `label<TAB>text` lines.
pub fn to_tsv(records: &[(Class, String)]) -> String {
    records.iter().map(|(c, t)| format!("{}\t{t}\n", c.name())).collect()
}

/// GloVe text format, words sorted.
pub fn glove_to_text(glove: &GloveVectors) -> String {
    let mut words: Vec<_> = glove.vectors.iter().collect();
    words.sort_by(|a, b| a.0.cmp(b.0));
    let mut out = String::new();
    for (w, v) in words {
        out.push_str(w);
        for x in v {
            out.push_str(&format!(" {x:?}"));
        }
        out.push('\n');
    }
    out
}
