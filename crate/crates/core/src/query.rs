//! Building focus-abstracted queries from a designer's selection.
//!
//! A selection picks sentences of a seed document, flags lemmas to ignore
//! and maps lemmas to one of their knowledge-base properties. The query is
//! the ordered, de-duplicated sequence of the remaining content terms with
//! abstracted terms replaced by their chosen property.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Document, Token};
use crate::embedding::VectorInput;
use crate::kb::KnowledgeBase;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("selection is for document {selected:?} but document {given:?} was supplied")]
    DocumentMismatch { selected: String, given: String },
    #[error("no sentences selected")]
    EmptySelection,
    #[error("sentence index {index} out of range (document has {count})")]
    InvalidSentence { index: usize, count: usize },
    #[error("{0:?} is both ignored and abstracted")]
    IgnoredAndAbstracted(String),
    #[error("{0:?} is abstracted but does not occur in the selected sentences")]
    AbstractionTermAbsent(String),
    #[error("property {property:?} is not offered for {lemma:?}")]
    PropertyNotOffered { lemma: String, property: String },
    #[error("the selection leaves no terms")]
    EmptyQuery,
}

impl QueryError {
    /// Stable identifier for machine consumers.
    pub fn code(&self) -> &'static str {
        match self {
            QueryError::DocumentMismatch { .. } => "document_mismatch",
            QueryError::EmptySelection => "empty_selection",
            QueryError::InvalidSentence { .. } => "invalid_sentence",
            QueryError::IgnoredAndAbstracted(_) => "ignored_and_abstracted",
            QueryError::AbstractionTermAbsent(_) => "abstraction_term_absent",
            QueryError::PropertyNotOffered { .. } => "property_not_offered",
            QueryError::EmptyQuery => "empty_query",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FocusSelection {
    pub doc_id: String,
    pub sentence_indices: BTreeSet<usize>,
    #[serde(rename = "ignored", default)]
    pub ignored_lemmas: BTreeSet<String>,
    #[serde(rename = "abstractions", default)]
    pub abstraction_choices: BTreeMap<String, String>,
}

impl FocusSelection {
    pub fn new(doc_id: impl Into<String>) -> Self {
        FocusSelection { doc_id: doc_id.into(), ..Default::default() }
    }

    pub fn sentence(mut self, index: usize) -> Self {
        self.sentence_indices.insert(index);
        self
    }

    pub fn ignore(mut self, lemma: impl Into<String>) -> Self {
        self.ignored_lemmas.insert(lemma.into());
        self
    }

    pub fn abstract_term(mut self, lemma: impl Into<String>, property: impl Into<String>) -> Self {
        self.abstraction_choices.insert(lemma.into(), property.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "text", rename_all = "lowercase")]
pub enum QueryToken {
    Term(String),
    Property(String),
}

impl QueryToken {
    pub fn text(&self) -> &str {
        match self {
            QueryToken::Term(s) | QueryToken::Property(s) => s,
        }
    }

    pub fn is_property(&self) -> bool {
        matches!(self, QueryToken::Property(_))
    }

    pub fn as_input(&self) -> VectorInput<'_> {
        match self {
            QueryToken::Term(s) => VectorInput::Word(s),
            QueryToken::Property(s) => VectorInput::Property(s),
        }
    }
}

impl fmt::Display for QueryToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.text())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FocusQuery {
    pub tokens: Vec<QueryToken>,
    /// The selection with every key resolved to a lemma.
    pub source: FocusSelection,
}

impl FocusQuery {
    pub fn properties(&self) -> BTreeSet<String> {
        self.tokens
            .iter()
            .filter_map(|t| match t {
                QueryToken::Property(p) => Some(p.clone()),
                QueryToken::Term(_) => None,
            })
            .collect()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.tokens.iter().map(QueryToken::text).collect()
    }

    pub fn inputs(&self) -> impl Iterator<Item = VectorInput<'_>> {
        self.tokens.iter().map(QueryToken::as_input)
    }
}

/// Which words the keyword-only baseline queries with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FocusOnlyMode {
    /// Every term kept after ignoring, abstracted or not.
    #[default]
    Step2Terms,
    /// Only the lemmas that were abstracted, in their original form.
    AbstractedWordsOnly,
}

fn selected_tokens<'d>(doc: &'d Document, sel: &FocusSelection) -> Result<Vec<&'d Token>, QueryError> {
    if sel.doc_id != doc.id {
        return Err(QueryError::DocumentMismatch { selected: sel.doc_id.clone(), given: doc.id.clone() });
    }
    if sel.sentence_indices.is_empty() {
        return Err(QueryError::EmptySelection);
    }
    let count = doc.sentences.len();
    let mut tokens = Vec::new();
    for &index in &sel.sentence_indices {
        let sentence = doc.sentences.get(index).ok_or(QueryError::InvalidSentence { index, count })?;
        tokens.extend(sentence.tokens.iter());
    }
    Ok(tokens)
}

/// Maps a key given as a surface form ("bars") to the lemma of the token
/// carrying it ("bar"). Keys already equal to a lemma are kept.
fn resolve_key(key: &str, tokens: &[&Token]) -> String {
    let lower = key.to_lowercase();
    if tokens.iter().any(|t| t.lemma == lower) {
        return lower;
    }
    tokens
        .iter()
        .find(|t| t.surface.to_lowercase() == lower)
        .map(|t| t.lemma.clone())
        .unwrap_or(lower)
}

fn normalize(sel: &FocusSelection, tokens: &[&Token]) -> Result<FocusSelection, QueryError> {
    let ignored: BTreeSet<String> = sel.ignored_lemmas.iter().map(|k| resolve_key(k, tokens)).collect();
    let mut abstractions = BTreeMap::new();
    for (k, p) in &sel.abstraction_choices {
        let lemma = resolve_key(k, tokens);
        if ignored.contains(&lemma) {
            return Err(QueryError::IgnoredAndAbstracted(lemma));
        }
        if !tokens.iter().any(|t| t.is_content() && t.lemma == lemma) {
            return Err(QueryError::AbstractionTermAbsent(lemma));
        }
        abstractions.insert(lemma, p.clone());
    }
    Ok(FocusSelection {
        doc_id: sel.doc_id.clone(),
        sentence_indices: sel.sentence_indices.clone(),
        ignored_lemmas: ignored,
        abstraction_choices: abstractions,
    })
}

fn kept_tokens<'d>(tokens: &[&'d Token], sel: &FocusSelection) -> impl Iterator<Item = &'d Token> {
    tokens
        .iter()
        .copied()
        .filter(|t| t.is_content() && !sel.ignored_lemmas.contains(&t.lemma))
        .collect::<Vec<_>>()
        .into_iter()
}

pub fn build_query(doc: &Document, sel: &FocusSelection, kb: &KnowledgeBase) -> Result<FocusQuery, QueryError> {
    let tokens = selected_tokens(doc, sel)?;
    let sel = normalize(sel, &tokens)?;
    for (lemma, property) in &sel.abstraction_choices {
        if !kb.abstractions_for(lemma).iter().any(|e| &e.property == property) {
            return Err(QueryError::PropertyNotOffered { lemma: lemma.clone(), property: property.clone() });
        }
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for t in kept_tokens(&tokens, &sel) {
        let qt = match sel.abstraction_choices.get(&t.lemma) {
            Some(p) => QueryToken::Property(p.clone()),
            None => QueryToken::Term(t.lemma.clone()),
        };
        if seen.insert(qt.clone()) {
            out.push(qt);
        }
    }
    if out.is_empty() {
        return Err(QueryError::EmptyQuery);
    }
    Ok(FocusQuery { tokens: out, source: sel })
}

/// The focus terms before abstraction: same filtering as [`build_query`],
/// abstracted lemmas kept as themselves.
pub fn step2_terms(doc: &Document, sel: &FocusSelection) -> Result<Vec<String>, QueryError> {
    let tokens = selected_tokens(doc, sel)?;
    let sel = normalize(sel, &tokens)?;
    let mut seen = HashSet::new();
    let out: Vec<String> = kept_tokens(&tokens, &sel)
        .filter(|t| seen.insert(t.lemma.as_str()))
        .map(|t| t.lemma.clone())
        .collect();
    if out.is_empty() {
        return Err(QueryError::EmptyQuery);
    }
    Ok(out)
}

/// Query words for the keyword-only baseline.
pub fn focus_only_terms(doc: &Document, sel: &FocusSelection, mode: FocusOnlyMode) -> Result<Vec<String>, QueryError> {
    let terms = step2_terms(doc, sel)?;
    match mode {
        FocusOnlyMode::Step2Terms => Ok(terms),
        FocusOnlyMode::AbstractedWordsOnly => {
            let tokens = selected_tokens(doc, sel)?;
            let sel = normalize(sel, &tokens)?;
            let narrowed: Vec<String> = terms
                .into_iter()
                .filter(|t| sel.abstraction_choices.contains_key(t))
                .collect();
            if narrowed.is_empty() {
                Err(QueryError::EmptyQuery)
            } else {
                Ok(narrowed)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Analyzer;
    use crate::kb::PropertyEntry;
    use proptest::prelude::*;

    const SOAPY: &str = "Unique 2 piece horizontal soap dish with a slide that keeps excess soapy water away from the bar of soap. extendable for different sizes of soap bars. it removes soapy water away from the bar of soap keeping it dryer to last longer. Easy to clean and looks great in any bathroom.";

    fn doc() -> Document {
        Document::analyze("soapy-slider", "Soapy slider", SOAPY, &Analyzer::new())
    }

    fn kb() -> KnowledgeBase {
        let e = |t: &str, p: &str, l: u32| (t.to_string(), PropertyEntry { property: p.to_string(), level: l });
        KnowledgeBase::from_entries(vec![
            e("soap", "ToiletrySubstance", 1),
            e("soap", "PersonalProduct", 2),
            e("soap", "TangibleThing", 4),
            e("size", "SpatialQuantity", 1),
            e("remove", "RemovingSomething", 1),
            e("water", "LiquidTangibleThing", 1),
            e("bar", "SolidTangibleThing", 2),
        ])
    }

    fn scenario1() -> FocusSelection {
        FocusSelection::new("soapy-slider")
            .sentence(1)
            .ignore("bars")
            .abstract_term("sizes", "SpatialQuantity")
            .abstract_term("soap", "PersonalProduct")
    }

    #[test]
    fn designer_a_query() {
        let q = build_query(&doc(), &scenario1(), &kb()).unwrap();
        assert_eq!(q.texts(), ["extendable", "different", "SpatialQuantity", "PersonalProduct"]);
        assert!(q.source.ignored_lemmas.contains("bar"));
        assert!(q.source.abstraction_choices.contains_key("size"));
        assert_eq!(step2_terms(&doc(), &scenario1()).unwrap(), ["extendable", "different", "size", "soap"]);
        assert_eq!(
            focus_only_terms(&doc(), &scenario1(), FocusOnlyMode::AbstractedWordsOnly).unwrap(),
            ["size", "soap"]
        );
    }

    #[test]
    fn designer_b_query() {
        let sel = FocusSelection::new("soapy-slider")
            .sentence(2)
            .abstract_term("removes", "RemovingSomething")
            .abstract_term("water", "LiquidTangibleThing")
            .abstract_term("bar", "SolidTangibleThing");
        let sel = ["soapy", "soap", "keeping", "dryer", "last", "longer"]
            .into_iter()
            .fold(sel, |s, w| s.ignore(w));
        let q = build_query(&doc(), &sel, &kb()).unwrap();
        let set: BTreeSet<&str> = q.texts().into_iter().collect();
        assert_eq!(set, BTreeSet::from(["RemovingSomething", "LiquidTangibleThing", "SolidTangibleThing"]));
    }

    #[test]
    fn selection_errors() {
        let d = doc();
        let k = kb();
        assert_eq!(build_query(&d, &FocusSelection::new("soapy-slider"), &k), Err(QueryError::EmptySelection));
        assert_eq!(
            build_query(&d, &FocusSelection::new("soapy-slider").sentence(9), &k),
            Err(QueryError::InvalidSentence { index: 9, count: 4 })
        );
        assert!(matches!(build_query(&d, &FocusSelection::new("other").sentence(1), &k), Err(QueryError::DocumentMismatch { .. })));
        let all_ignored = ["extendable", "different", "size", "soap", "bar"]
            .into_iter()
            .fold(FocusSelection::new("soapy-slider").sentence(1), |s, w| s.ignore(w));
        assert_eq!(build_query(&d, &all_ignored, &k), Err(QueryError::EmptyQuery));
        assert_eq!(step2_terms(&d, &all_ignored), Err(QueryError::EmptyQuery));
        let both = scenario1().ignore("soap");
        assert_eq!(build_query(&d, &both, &k), Err(QueryError::IgnoredAndAbstracted("soap".into())));
        let absent = FocusSelection::new("soapy-slider").sentence(1).abstract_term("water", "LiquidTangibleThing");
        assert_eq!(build_query(&d, &absent, &k), Err(QueryError::AbstractionTermAbsent("water".into())));
        let not_offered = FocusSelection::new("soapy-slider").sentence(1).abstract_term("soap", "TangibleThing");
        assert!(matches!(build_query(&d, &not_offered, &k), Err(QueryError::PropertyNotOffered { .. })));
    }

    #[test]
    fn duplicates_keep_first_occurrence() {
        let sel = FocusSelection::new("soapy-slider").sentence(0).sentence(2);
        let q = build_query(&doc(), &sel, &kb()).unwrap();
        let texts = q.texts();
        let distinct: HashSet<&&str> = texts.iter().collect();
        assert_eq!(distinct.len(), texts.len());
        assert_eq!(texts[0], "unique");
    }

    #[test]
    fn selection_json_shape() {
        let json = serde_json::to_string(&scenario1()).unwrap();
        assert_eq!(
            json,
            r#"{"doc_id":"soapy-slider","sentence_indices":[1],"ignored":["bars"],"abstractions":{"sizes":"SpatialQuantity","soap":"PersonalProduct"}}"#
        );
        let back: FocusSelection = serde_json::from_str(&json).unwrap();
        assert_eq!(back, scenario1());
        let token = serde_json::to_string(&QueryToken::Property("PersonalProduct".into())).unwrap();
        assert_eq!(token, r#"{"kind":"property","text":"PersonalProduct"}"#);
    }

    proptest! {
        #[test]
        fn query_invariants(
            sentences in proptest::collection::btree_set(0usize..4, 1..4),
            ignore_mask in proptest::collection::vec(any::<bool>(), 40),
            abstract_mask in proptest::collection::vec(any::<bool>(), 40),
        ) {
            let d = doc();
            let k = kb();
            let mut sel = FocusSelection::new("soapy-slider");
            sel.sentence_indices = sentences.clone();
            let lemmas: Vec<String> = sentences.iter()
                .flat_map(|&i| d.sentences[i].tokens.iter())
                .filter(|t| t.is_content())
                .map(|t| t.lemma.clone())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            for (i, l) in lemmas.iter().enumerate() {
                let offered = k.abstractions_for(l);
                if abstract_mask[i % 40] && !offered.is_empty() {
                    sel.abstraction_choices.insert(l.clone(), offered[0].property.clone());
                } else if ignore_mask[i % 40] {
                    sel.ignored_lemmas.insert(l.clone());
                }
            }
            let (q, terms) = match (build_query(&d, &sel, &k), step2_terms(&d, &sel)) {
                (Ok(q), Ok(t)) => (q, t),
                (Err(a), Err(b)) => { prop_assert_eq!(a, b); return Ok(()); }
                (Err(e), Ok(_)) => { prop_assert_eq!(e, QueryError::EmptyQuery); return Ok(()); }
                (Ok(_), Err(e)) => { prop_assert!(false, "step2 failed alone: {e}"); unreachable!() }
            };
            for t in &q.tokens {
                match t {
                    QueryToken::Term(l) => prop_assert!(!sel.ignored_lemmas.contains(l)),
                    QueryToken::Property(p) => prop_assert!(sel.abstraction_choices.values().any(|v| v == p)),
                }
            }
            let expected_terms: Vec<&String> = terms.iter().filter(|t| !sel.abstraction_choices.contains_key(*t)).collect();
            let got_terms: Vec<&String> = q.tokens.iter().filter_map(|t| match t { QueryToken::Term(l) => Some(l), _ => None }).collect();
            prop_assert_eq!(got_terms, expected_terms);
        }
    }
}
