//! Re-representing documents under a query's properties.
//!
//! Every non-stopword noun, verb or adjective whose lemma carries one of the
//! query properties in the knowledge base is replaced by all of its matching
//! properties. Matching looks at every level of the knowledge base, not only
//! the levels offered to designers.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{is_stopword, Corpus, Document, Pos};
use crate::embedding::VectorInput;
use crate::kb::KnowledgeBase;
use crate::query::QueryToken;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Replacement {
    pub lemma: String,
    pub property: String,
    pub sentence_index: usize,
    /// Position of the emitted property token in [`AbstractedDocument::tokens`].
    pub token_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbstractedDocument {
    pub doc_id: String,
    pub tokens: Vec<QueryToken>,
    pub replacements: Vec<Replacement>,
    /// Per token: whether it was an open-class content word that could be
    /// abstracted, and the sentence it came from.
    #[serde(skip)]
    slots: Vec<Slot>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct Slot {
    eligible: bool,
    sentence: usize,
}

impl AbstractedDocument {
    /// Passes the document through unchanged: every token is a term.
    pub fn unchanged(doc: &Document) -> Self {
        let mut tokens = Vec::new();
        let mut slots = Vec::new();
        for s in &doc.sentences {
            for t in &s.tokens {
                tokens.push(QueryToken::Term(t.lemma.clone()));
                slots.push(Slot {
                    eligible: !t.is_stopword && matches!(t.pos, Pos::Noun | Pos::Verb | Pos::Adj),
                    sentence: s.index,
                });
            }
        }
        AbstractedDocument { doc_id: doc.id.clone(), tokens, replacements: Vec::new(), slots }
    }

    /// Applies the substitution to this document's remaining terms.
    pub fn abstracted(&self, properties: &BTreeSet<String>, kb: &KnowledgeBase) -> Self {
        let mut out = AbstractedDocument {
            doc_id: self.doc_id.clone(),
            tokens: Vec::with_capacity(self.tokens.len()),
            replacements: self.replacements.clone(),
            slots: Vec::with_capacity(self.slots.len()),
        };
        let mut remap = vec![0usize; self.tokens.len()];
        for (i, (token, slot)) in self.tokens.iter().zip(&self.slots).enumerate() {
            remap[i] = out.tokens.len();
            let matching: Vec<&str> = match token {
                QueryToken::Term(lemma) if slot.eligible => kb
                    .all_abstractions(lemma)
                    .iter()
                    .filter(|e| properties.contains(&e.property))
                    .map(|e| e.property.as_str())
                    .collect(),
                _ => Vec::new(),
            };
            if matching.is_empty() {
                out.tokens.push(token.clone());
                out.slots.push(*slot);
                continue;
            }
            for property in matching {
                out.replacements.push(Replacement {
                    lemma: token.text().to_string(),
                    property: property.to_string(),
                    sentence_index: slot.sentence,
                    token_index: out.tokens.len(),
                });
                out.tokens.push(QueryToken::Property(property.to_string()));
                out.slots.push(Slot { eligible: false, sentence: slot.sentence });
            }
        }
        for r in out.replacements.iter_mut().take(self.replacements.len()) {
            r.token_index = remap[r.token_index];
        }
        out
    }

    /// Inputs for the document vector. Stopword terms drop out when averaged.
    pub fn inputs(&self) -> impl Iterator<Item = VectorInput<'_>> {
        self.tokens.iter().map(QueryToken::as_input)
    }

    /// Distinct `(lemma, property)` pairs in order of first replacement.
    pub fn matched_properties(&self) -> Vec<(String, String)> {
        let mut seen = BTreeSet::new();
        self.replacements
            .iter()
            .filter(|r| seen.insert((r.lemma.as_str(), r.property.as_str())))
            .map(|r| (r.lemma.clone(), r.property.clone()))
            .collect()
    }

    /// Number of terms that are neither stopwords nor properties.
    pub fn content_term_count(&self) -> usize {
        self.tokens
            .iter()
            .filter(|t| matches!(t, QueryToken::Term(l) if !is_stopword(l)))
            .count()
    }
}

pub fn abstract_document(doc: &Document, properties: &BTreeSet<String>, kb: &KnowledgeBase) -> AbstractedDocument {
    AbstractedDocument::unchanged(doc).abstracted(properties, kb)
}

/// Abstracts every document in corpus order. Runs in parallel; the result
/// does not depend on scheduling.
pub fn abstract_corpus(corpus: &Corpus, properties: &BTreeSet<String>, kb: &KnowledgeBase) -> Vec<AbstractedDocument> {
    corpus
        .documents()
        .par_iter()
        .map(|d| abstract_document(d, properties, kb))
        .collect()
}
