//! Sentence segmentation and word tokenization.

/// Lowercased words that end in a period without ending a sentence.
const ABBREVIATIONS: &[&str] = &[
    "e.g", "i.e", "etc", "vs", "approx", "incl", "mr", "mrs", "ms", "dr", "fig", "inc", "ltd", "jr",
    "sr", "u.s", "oz", "lbs", "ft", "cm", "mm",
];

/// A sentence together with its byte range in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceSpan<'a> {
    pub start: usize,
    pub end: usize,
    pub text: &'a str,
}

/// Splits `text` into raw sentences.
///
/// A sentence ends at `.`, `!` or `?` (plus any closing quotes or brackets)
/// followed by whitespace or the end of the text. A period closing one of a
/// small set of abbreviations does not end a sentence.
pub fn segment_sentences(text: &str) -> Vec<String> {
    sentence_spans(text)
        .into_iter()
        .map(|s| s.text.to_string())
        .collect()
}

pub(crate) fn sentence_spans(text: &str) -> Vec<SentenceSpan<'_>> {
    let mut spans = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut start: Option<usize> = None;
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if start.is_none() {
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            start = Some(pos);
        }
        if matches!(c, '.' | '!' | '?') {
            let mut j = i + 1;
            while j < chars.len() && matches!(chars[j].1, '.' | '!' | '?' | '"' | '\'' | ')' | ']' | '”' | '’') {
                j += 1;
            }
            let at_boundary = j == chars.len() || chars[j].1.is_whitespace();
            let s = start.unwrap();
            if at_boundary && !(c == '.' && j == i + 1 && ends_with_abbreviation(&text[s..pos])) {
                let end = if j == chars.len() { text.len() } else { chars[j].0 };
                spans.push(SentenceSpan { start: s, end, text: &text[s..end] });
                start = None;
                i = j;
                continue;
            }
        }
        i += 1;
    }
    if let Some(s) = start {
        let tail = text[s..].trim_end();
        if !tail.is_empty() {
            spans.push(SentenceSpan { start: s, end: s + tail.len(), text: tail });
        }
    }
    spans
}

fn ends_with_abbreviation(before_period: &str) -> bool {
    let word = before_period
        .rsplit(|c: char| c.is_whitespace() || c == '(')
        .next()
        .unwrap_or("")
        .to_lowercase();
    ABBREVIATIONS.contains(&word.as_str())
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

fn is_joiner(c: char) -> bool {
    matches!(c, '-' | '\'' | '’')
}

/// Splits on whitespace and punctuation. Hyphens and apostrophes between
/// two word characters stay inside the word ("soap-dish", "don't").
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let joins = is_joiner(c) && !current.is_empty() && chars.get(i + 1).copied().is_some_and(is_word_char);
        if is_word_char(c) || joins {
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}
