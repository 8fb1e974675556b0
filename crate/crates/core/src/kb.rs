//! Term abstraction lookup over a superset knowledge base.
//!
//! Every record names a lemma, one of its superset properties and that
//! property's abstraction level (1 = direct superset). Designers only see
//! the first [`DISPLAY_LEVELS`] levels; corpus re-representation matches on
//! the full entry list.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Deepest abstraction level offered for selection.
pub const DISPLAY_LEVELS: u32 = 3;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("cannot read knowledge base {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{source_name} line {line}: malformed record: {message}")]
    Malformed { source_name: String, line: usize, message: String },
    #[error("{source_name} line {line}: abstraction level {level} is not a positive integer")]
    InvalidLevel { source_name: String, line: usize, level: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PropertyEntry {
    pub property: String,
    pub level: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KbRecord {
    term: String,
    property: String,
    level: i64,
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    forward: HashMap<String, Vec<PropertyEntry>>,
    reverse: HashMap<String, BTreeSet<String>>,
}

static EMPTY_TERMS: BTreeSet<String> = BTreeSet::new();

impl KnowledgeBase {
    /// Builds from `(term, property, level)` triples. Within a term, entries
    /// are ordered by level with input order kept inside a level; a repeated
    /// `(term, property)` pair keeps its first occurrence.
    pub fn from_entries<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (String, PropertyEntry)>,
    {
        let mut forward: HashMap<String, Vec<PropertyEntry>> = HashMap::new();
        for (term, entry) in entries {
            let list = forward.entry(term).or_default();
            if !list.iter().any(|e| e.property == entry.property) {
                list.push(entry);
            }
        }
        let mut reverse: HashMap<String, BTreeSet<String>> = HashMap::new();
        for (term, list) in forward.iter_mut() {
            list.sort_by_key(|e| e.level);
            for e in list.iter() {
                reverse.entry(e.property.clone()).or_default().insert(term.clone());
            }
        }
        KnowledgeBase { forward, reverse }
    }

    /// Entries at display depth, most specific first. Empty for unknown lemmas.
    pub fn abstractions_for(&self, lemma: &str) -> Vec<PropertyEntry> {
        self.all_abstractions(lemma)
            .iter()
            .filter(|e| e.level <= DISPLAY_LEVELS)
            .cloned()
            .collect()
    }

    /// Every entry for `lemma`, regardless of level.
    pub fn all_abstractions(&self, lemma: &str) -> &[PropertyEntry] {
        self.forward.get(lemma).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn terms_with_property(&self, property: &str) -> &BTreeSet<String> {
        self.reverse.get(property).unwrap_or(&EMPTY_TERMS)
    }

    pub fn has_property(&self, lemma: &str, property: &str) -> bool {
        self.terms_with_property(property).contains(lemma)
    }

    pub fn contains_term(&self, lemma: &str) -> bool {
        self.forward.contains_key(lemma)
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.forward.keys().map(String::as_str)
    }

    pub fn properties(&self) -> impl Iterator<Item = &str> {
        self.reverse.keys().map(String::as_str)
    }

    pub fn term_count(&self) -> usize {
        self.forward.len()
    }
}

/// Parses KB records. Terms are trimmed and lowercased to match lemmas.
pub fn read_kb_entries<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<(String, PropertyEntry)>, KbError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let malformed = |message: String| KbError::Malformed { source_name: source_name.to_string(), line: line_no, message };
        let line = line.map_err(|e| malformed(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: KbRecord = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        let term = rec.term.trim().to_lowercase();
        if term.is_empty() {
            return Err(malformed("empty term".into()));
        }
        if rec.property.is_empty() || rec.property.chars().any(char::is_whitespace) {
            return Err(malformed(format!("property {:?} must be nonempty without whitespace", rec.property)));
        }
        if rec.level < 1 || rec.level > i64::from(u32::MAX) {
            return Err(KbError::InvalidLevel { source_name: source_name.to_string(), line: line_no, level: rec.level });
        }
        out.push((term, PropertyEntry { property: rec.property, level: rec.level as u32 }));
    }
    Ok(out)
}

fn read_file(path: &Path) -> Result<Vec<(String, PropertyEntry)>, KbError> {
    let file = File::open(path).map_err(|source| KbError::Io { path: path.to_path_buf(), source })?;
    read_kb_entries(BufReader::new(file), &path.display().to_string())
}

/// Merges primary and fallback entries. Fallback entries are used only for
/// terms that have no entry at all in the primary source.
pub fn merge_kb(primary: Vec<(String, PropertyEntry)>, fallback: Vec<(String, PropertyEntry)>) -> KnowledgeBase {
    let primary_terms: HashSet<String> = primary.iter().map(|(t, _)| t.clone()).collect();
    KnowledgeBase::from_entries(
        primary
            .into_iter()
            .chain(fallback.into_iter().filter(|(t, _)| !primary_terms.contains(t))),
    )
}

pub fn load_kb(primary_path: impl AsRef<Path>, fallback_path: Option<&Path>) -> Result<KnowledgeBase, KbError> {
    let primary = read_file(primary_path.as_ref())?;
    let fallback = match fallback_path {
        Some(p) => read_file(p)?,
        None => Vec::new(),
    };
    Ok(merge_kb(primary, fallback))
}
