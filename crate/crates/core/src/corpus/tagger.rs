//! Lexicon-first part-of-speech tagging and morphy-style lemmatization.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::stopwords::is_stopword;

/// Coarse part of speech. Only nouns, verbs and adjectives are candidates
/// for IGNORE flags and abstraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Other,
}

impl Pos {
    pub const CONTENT: [Pos; 3] = [Pos::Noun, Pos::Verb, Pos::Adj];

    pub fn is_content(self) -> bool {
        self != Pos::Other
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "NOUN",
            Pos::Verb => "VERB",
            Pos::Adj => "ADJ",
            Pos::Other => "OTHER",
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownPos(pub String);

impl fmt::Display for UnknownPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown part-of-speech tag {:?}", self.0)
    }
}

impl std::error::Error for UnknownPos {}

impl FromStr for Pos {
    type Err = UnknownPos;

    /// Accepts the four coarse tags and Penn Treebank tags (NN*, VB*, JJ*;
    /// any other Penn tag maps to OTHER).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        match upper.as_str() {
            "NOUN" | "N" => Ok(Pos::Noun),
            "VERB" | "V" => Ok(Pos::Verb),
            "ADJ" | "A" => Ok(Pos::Adj),
            "OTHER" => Ok(Pos::Other),
            t if t.starts_with("NN") => Ok(Pos::Noun),
            t if t.starts_with("VB") => Ok(Pos::Verb),
            t if t.starts_with("JJ") => Ok(Pos::Adj),
            t if !t.is_empty() && t.chars().all(|c| c.is_ascii_uppercase() || c == '$') => Ok(Pos::Other),
            _ => Err(UnknownPos(s.to_string())),
        }
    }
}

// Irregular forms, keyed by part of speech.
const NOUN_EXCEPTIONS: &[(&str, &str)] = &[
    ("knives", "knife"), ("wives", "wife"), ("lives", "life"), ("leaves", "leaf"),
    ("shelves", "shelf"), ("halves", "half"), ("loaves", "loaf"), ("wolves", "wolf"),
    ("feet", "foot"), ("teeth", "tooth"), ("geese", "goose"), ("mice", "mouse"),
    ("men", "man"), ("women", "woman"), ("children", "child"), ("dice", "die"),
];

const VERB_EXCEPTIONS: &[(&str, &str)] = &[
    ("built", "build"), ("ran", "run"), ("made", "make"), ("held", "hold"), ("kept", "keep"),
    ("took", "take"), ("taken", "take"), ("gave", "give"), ("given", "give"), ("went", "go"),
    ("gone", "go"), ("came", "come"), ("got", "get"), ("found", "find"), ("told", "tell"),
    ("brought", "bring"), ("bought", "buy"), ("caught", "catch"), ("sat", "sit"), ("hung", "hang"),
    ("wound", "wind"), ("fed", "feed"), ("fell", "fall"), ("felt", "feel"), ("saw", "see"),
    ("seen", "see"), ("wrote", "write"), ("written", "write"), ("broke", "break"),
    ("broken", "break"), ("chose", "choose"), ("chosen", "choose"), ("spun", "spin"),
    ("stood", "stand"), ("slid", "slide"), ("ground", "grind"), ("lay", "lie"), ("led", "lead"),
];

const ADJ_EXCEPTIONS: &[(&str, &str)] = &[
    ("better", "good"), ("best", "good"), ("worse", "bad"), ("worst", "bad"),
    ("further", "far"), ("farther", "far"), ("less", "little"), ("least", "little"),
];

const NOUN_RULES: &[(&str, &str)] = &[
    ("s", ""), ("ses", "s"), ("xes", "x"), ("zes", "z"), ("ches", "ch"), ("shes", "sh"),
    ("men", "man"), ("ies", "y"), ("es", "e"), ("es", ""),
];

const VERB_RULES: &[(&str, &str)] = &[
    ("s", ""), ("ies", "y"), ("es", "e"), ("es", ""), ("ed", ""), ("ed", "e"), ("ing", ""),
    ("ing", "e"),
];

const ADJ_RULES: &[(&str, &str)] = &[("er", ""), ("est", ""), ("er", "e"), ("est", "e")];

const ADJ_SUFFIXES: &[&str] = &["able", "ible", "ous", "ful", "less", "ive", "ish", "ical"];
const VERB_SUFFIXES: &[&str] = &["ize", "ise", "ate", "ify"];
const NOUN_SUFFIXES: &[&str] = &["tion", "sion", "ness", "ment", "ity", "ism", "ist", "er", "or"];

struct Lexicon {
    tags: HashMap<String, Vec<Pos>>,
}

impl Lexicon {
    fn parse(src: &str) -> Self {
        let mut tags = HashMap::new();
        for line in src.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, tag_list) = line.split_once('\t').expect("lexicon line needs a tab");
            let parsed: Vec<Pos> = tag_list
                .split(',')
                .map(|t| t.parse().expect("lexicon tag"))
                .collect();
            tags.insert(word.to_string(), parsed);
        }
        Lexicon { tags }
    }

    fn shipped() -> &'static Lexicon {
        static LEXICON: OnceLock<Lexicon> = OnceLock::new();
        LEXICON.get_or_init(|| Lexicon::parse(include_str!("../../data/lexicon.tsv")))
    }

    fn get(&self, word: &str) -> Option<&[Pos]> {
        self.tags.get(word).map(Vec::as_slice)
    }

    fn has(&self, word: &str, pos: Pos) -> bool {
        self.get(word).is_some_and(|t| t.contains(&pos))
    }
}

fn exceptions(pos: Pos) -> &'static [(&'static str, &'static str)] {
    match pos {
        Pos::Noun => NOUN_EXCEPTIONS,
        Pos::Verb => VERB_EXCEPTIONS,
        Pos::Adj => ADJ_EXCEPTIONS,
        Pos::Other => &[],
    }
}

fn rules(pos: Pos) -> &'static [(&'static str, &'static str)] {
    match pos {
        Pos::Noun => NOUN_RULES,
        Pos::Verb => VERB_RULES,
        Pos::Adj => ADJ_RULES,
        Pos::Other => &[],
    }
}

fn lookup_exception(word: &str, pos: Pos) -> Option<&'static str> {
    exceptions(pos).iter().find(|(w, _)| *w == word).map(|(_, base)| *base)
}

/// Candidate base forms from the detachment rules, in rule order. A stem
/// ending in a doubled consonant ("cutt" from "cutting") also yields its
/// undoubled form.
fn detachments(word: &str, pos: Pos) -> Vec<String> {
    let mut out = Vec::new();
    for (suffix, replacement) in rules(pos) {
        if let Some(stem) = word.strip_suffix(suffix) {
            if stem.len() < 2 {
                continue;
            }
            out.push(format!("{stem}{replacement}"));
            if replacement.is_empty() && matches!(*suffix, "ing" | "ed" | "er" | "est") {
                let b = stem.as_bytes();
                let n = b.len();
                if n >= 3 && b[n - 1] == b[n - 2] && !b"aeiouslz".contains(&b[n - 1]) {
                    out.push(stem[..n - 1].to_string());
                }
            }
        }
    }
    out
}

fn has_letter(word: &str) -> bool {
    word.chars().any(char::is_alphabetic)
}

/// Tags tokens and derives lemmas. Lemma candidates are checked against the
/// shipped lexicon, optional knowledge-base terms and, as a second tier,
/// an optional embedding vocabulary.
#[derive(Debug, Clone, Default)]
pub struct Analyzer {
    kb_terms: HashSet<String>,
    embedding_vocab: HashSet<String>,
}

impl Analyzer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_kb_terms<I, S>(mut self, terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.kb_terms.extend(terms.into_iter().map(Into::into));
        self
    }

    pub fn with_embedding_vocab<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.embedding_vocab.extend(words.into_iter().map(Into::into));
        self
    }

    fn known_base(&self, word: &str, pos: Pos) -> bool {
        Lexicon::shipped().has(word, pos) || self.kb_terms.contains(word)
    }

    /// Tags one surface form.
    pub fn tag(&self, surface: &str) -> Pos {
        let lower = surface.to_lowercase();
        let lexicon = Lexicon::shipped();
        if let Some(tags) = lexicon.get(&lower) {
            return tags[0];
        }
        if is_stopword(&lower) || !has_letter(&lower) {
            return Pos::Other;
        }
        if let Some(pos) = self.tag_inflected(&lower) {
            return pos;
        }
        let word = lower.as_str();
        let longer_than = |suffix: &str| word.len() >= suffix.len() + 3;
        if ADJ_SUFFIXES.iter().any(|s| word.ends_with(s) && longer_than(s)) {
            return Pos::Adj;
        }
        if VERB_SUFFIXES.iter().any(|s| word.ends_with(s) && longer_than(s)) {
            return Pos::Verb;
        }
        if NOUN_SUFFIXES.iter().any(|s| word.ends_with(s) && longer_than(s)) {
            return Pos::Noun;
        }
        if word.ends_with("ly") && longer_than("ly") {
            return Pos::Other;
        }
        if (word.ends_with("ing") && longer_than("ing")) || (word.ends_with("ed") && longer_than("ed")) {
            return Pos::Verb;
        }
        Pos::Noun
    }

    /// Finds an inflected form of a lexicon word. Among all matching bases
    /// the one whose tag ranks highest in that base's tag list wins.
    fn tag_inflected(&self, word: &str) -> Option<Pos> {
        let lexicon = Lexicon::shipped();
        let mut best: Option<(usize, Pos)> = None;
        for pos in Pos::CONTENT {
            let mut bases: Vec<String> = lookup_exception(word, pos).map(str::to_string).into_iter().collect();
            bases.extend(detachments(word, pos));
            for base in bases {
                if let Some(tags) = lexicon.get(&base) {
                    if let Some(rank) = tags.iter().position(|t| *t == pos) {
                        if best.is_none_or(|(r, _)| rank < r) {
                            best = Some((rank, pos));
                        }
                    }
                }
            }
        }
        best.map(|(_, pos)| pos)
    }

    pub fn pos_tag<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<Pos> {
        tokens.iter().map(|t| self.tag(t.as_ref())).collect()
    }

    /// Lowercase canonical form. Applies the single-step reduction until it
    /// reaches a fixed point, so the result is always idempotent.
    pub fn lemmatize(&self, surface: &str, pos: Pos) -> String {
        let mut word = surface.to_lowercase();
        if pos == Pos::Other || word.is_empty() {
            return word;
        }
        // every reduction shortens the word or maps an irregular form to a
        // regular one, so this terminates well before the bound
        for _ in 0..word.len() + 2 {
            let next = self.reduce_once(&word, pos);
            if next == word {
                break;
            }
            word = next;
        }
        word
    }

    fn reduce_once(&self, word: &str, pos: Pos) -> String {
        if let Some(base) = lookup_exception(word, pos) {
            return base.to_string();
        }
        if self.known_base(word, pos) {
            return word.to_string();
        }
        let candidates = detachments(word, pos);
        if let Some(c) = candidates.iter().find(|c| self.known_base(c, pos)) {
            return c.clone();
        }
        if let Some(c) = candidates.iter().find(|c| self.embedding_vocab.contains(c.as_str())) {
            return c.clone();
        }
        word.to_string()
    }
}

/// Tags with the shipped lexicon only.
pub fn pos_tag<S: AsRef<str>>(tokens: &[S]) -> Vec<Pos> {
    Analyzer::new().pos_tag(tokens)
}

/// Lemmatizes with the shipped lexicon only.
pub fn lemmatize(surface: &str, pos: Pos) -> String {
    Analyzer::new().lemmatize(surface, pos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lexicon_and_suffix_tags() {
        assert_eq!(pos_tag(&["soap"]), vec![Pos::Noun]);
        assert_eq!(pos_tag(&["extendable"]), vec![Pos::Adj]);
        assert!(pos_tag::<&str>(&[]).is_empty());
        assert_eq!(
            pos_tag(&["removes", "bars", "keeping", "dryer", "of", "2", "gizmo", "quickly"]),
            vec![Pos::Verb, Pos::Noun, Pos::Verb, Pos::Adj, Pos::Other, Pos::Other, Pos::Noun, Pos::Other]
        );
    }

    #[test]
    fn suffix_rules() {
        assert_eq!(pos_tag(&["glamorous", "hopeful", "modernize", "caffeinate", "brightness", "zapper"]),
            vec![Pos::Adj, Pos::Adj, Pos::Verb, Pos::Verb, Pos::Noun, Pos::Noun]);
    }

    #[test]
    fn product_text_lemmas() {
        assert_eq!(lemmatize("sizes", Pos::Noun), "size");
        assert_eq!(lemmatize("soap", Pos::Noun), "soap");
        assert_eq!(lemmatize("removes", Pos::Verb), "remove");
    }

    #[test]
    fn detachment_and_exceptions() {
        assert_eq!(lemmatize("knives", Pos::Noun), "knife");
        assert_eq!(lemmatize("boxes", Pos::Noun), "box");
        assert_eq!(lemmatize("hiking", Pos::Verb), "hike");
        assert_eq!(lemmatize("cutting", Pos::Verb), "cut");
        assert_eq!(lemmatize("dries", Pos::Verb), "dry");
        assert_eq!(lemmatize("dryer", Pos::Adj), "dry");
        assert_eq!(lemmatize("Built", Pos::Verb), "build");
        assert_eq!(lemmatize("Soap", Pos::Other), "soap");
        assert_eq!(lemmatize("gizmos", Pos::Noun), "gizmos");
    }

    #[test]
    fn extra_vocabulary_attests_candidates() {
        let a = Analyzer::new().with_embedding_vocab(["gizmo"]);
        assert_eq!(a.lemmatize("gizmos", Pos::Noun), "gizmo");
        let a = Analyzer::new().with_kb_terms(["reef"]);
        assert_eq!(a.lemmatize("reefs", Pos::Noun), "reef");
    }

    #[test]
    fn parses_penn_tags() {
        assert_eq!("NNS".parse::<Pos>().unwrap(), Pos::Noun);
        assert_eq!("VBG".parse::<Pos>().unwrap(), Pos::Verb);
        assert_eq!("JJR".parse::<Pos>().unwrap(), Pos::Adj);
        assert_eq!("IN".parse::<Pos>().unwrap(), Pos::Other);
        assert!("noun-ish".parse::<Pos>().is_err());
    }

    proptest! {
        #[test]
        fn lemmatize_is_idempotent(w in "[a-zA-Z]{1,12}", p in 0usize..4) {
            let pos = [Pos::Noun, Pos::Verb, Pos::Adj, Pos::Other][p];
            let a = Analyzer::new().with_embedding_vocab(["ca", "cas", "case", "bu", "clas"]);
            let once = a.lemmatize(&w, pos);
            prop_assert!(!once.is_empty());
            prop_assert_eq!(once.to_lowercase(), once.clone());
            prop_assert_eq!(a.lemmatize(&once, pos), once);
        }

        #[test]
        fn pos_tag_preserves_length(ws in proptest::collection::vec("[a-z0-9']{1,10}", 0..20)) {
            prop_assert_eq!(pos_tag(&ws).len(), ws.len());
        }
    }
}
