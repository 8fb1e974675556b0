//! The shipped English stopword list.

use std::collections::HashSet;
use std::sync::OnceLock;

pub const STOPWORD_COUNT: usize = 174;

pub fn stopwords() -> &'static HashSet<&'static str> {
    static WORDS: OnceLock<HashSet<&'static str>> = OnceLock::new();
    WORDS.get_or_init(|| {
        include_str!("../../data/stopwords.txt")
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

/// Case-insensitive membership test.
pub fn is_stopword(word: &str) -> bool {
    let set = stopwords();
    set.contains(word) || set.contains(word.to_lowercase().as_str())
}
