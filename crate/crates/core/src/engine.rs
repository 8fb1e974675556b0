//! Loaded data plus the dispatch from a selection and method to matches.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::Serialize;
use thiserror::Error;

use crate::abstraction::{abstract_corpus, AbstractedDocument};
use crate::corpus::{load_corpus, Analyzer, Corpus, CorpusError};
use crate::embedding::{load_embeddings, EmbeddingError, EmbeddingStore};
use crate::kb::{load_kb, KbError, KnowledgeBase};
use crate::query::{build_query, focus_only_terms, FocusOnlyMode, FocusSelection, QueryError, QueryToken};
use crate::search::{
    fallback_purpose_mechanism, load_purpose_mechanism, search_abstracted, search_focus_only, search_overall_glove,
    search_overall_purpmech, DocumentVectors, Match, Method, PurposeMechanismVectors, SearchError, DEFAULT_POOL,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Search(#[from] SearchError),
}

impl EngineError {
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::Corpus(_) => "corpus_error",
            EngineError::Kb(_) => "kb_error",
            EngineError::Embedding(_) => "embedding_error",
            EngineError::Query(e) => e.code(),
            EngineError::Search(e) => e.code(),
        }
    }
}

/// The analyzer every entry point uses: shipped lexicon plus KB terms as
/// known lemmas.
pub fn analyzer_for(kb: &KnowledgeBase) -> Analyzer {
    Analyzer::new().with_kb_terms(kb.terms())
}

pub fn load_kb_and_corpus(corpus: &Path, kb: &Path, kb_fallback: Option<&Path>) -> Result<(KnowledgeBase, Corpus), EngineError> {
    let kb = load_kb(kb, kb_fallback)?;
    let corpus = load_corpus(corpus, &analyzer_for(&kb))?;
    Ok((kb, corpus))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    /// The tokens the method actually scored with; empty for whole-document
    /// methods.
    pub query_tokens: Vec<QueryToken>,
    pub matches: Vec<Match>,
}

type AbstractionCache = Mutex<HashMap<BTreeSet<String>, Arc<Vec<AbstractedDocument>>>>;

pub struct Engine {
    pub corpus: Corpus,
    pub kb: KnowledgeBase,
    pub store: EmbeddingStore,
    pub docs: DocumentVectors,
    pub purpmech: PurposeMechanismVectors,
    cache: AbstractionCache,
}

impl Engine {
    pub fn new(corpus: Corpus, kb: KnowledgeBase, store: EmbeddingStore, purpmech: Option<PurposeMechanismVectors>) -> Self {
        let docs = DocumentVectors::build(&corpus, &store);
        let purpmech = purpmech.unwrap_or_else(|| fallback_purpose_mechanism(&corpus, &store));
        Engine { corpus, kb, store, docs, purpmech, cache: Mutex::default() }
    }

    pub fn load(
        corpus: &Path,
        kb: &Path,
        kb_fallback: Option<&Path>,
        embeddings: &Path,
        purpmech: Option<&Path>,
    ) -> Result<Self, EngineError> {
        let (kb, corpus) = load_kb_and_corpus(corpus, kb, kb_fallback)?;
        let store = load_embeddings(embeddings, None)?;
        let pm = purpmech.map(|p| load_purpose_mechanism(p, &corpus)).transpose()?;
        Ok(Engine::new(corpus, kb, store, pm))
    }

    /// The corpus abstracted under `properties`, computed once per set.
    pub fn abstracted(&self, properties: &BTreeSet<String>) -> Arc<Vec<AbstractedDocument>> {
        if let Some(hit) = self.cache.lock().expect("abstraction cache").get(properties) {
            return Arc::clone(hit);
        }
        let fresh = Arc::new(abstract_corpus(&self.corpus, properties, &self.kb));
        let mut cache = self.cache.lock().expect("abstraction cache");
        Arc::clone(cache.entry(properties.clone()).or_insert(fresh))
    }

    pub fn cached_property_sets(&self) -> usize {
        self.cache.lock().expect("abstraction cache").len()
    }

    pub fn search(&self, sel: &FocusSelection, method: Method, k: usize, mode: FocusOnlyMode) -> Result<SearchOutcome, EngineError> {
        let doc = self
            .corpus
            .get(&sel.doc_id)
            .ok_or_else(|| SearchError::UnknownDocument(sel.doc_id.clone()))?;
        let query = build_query(doc, sel, &self.kb)?;
        let (query_tokens, matches) = match method {
            Method::FocusAbstracted => {
                let abstracted = self.abstracted(&query.properties());
                let matches = search_abstracted(&query, &abstracted, &self.store, k)?;
                (query.tokens, matches)
            }
            Method::FocusOnly => {
                let terms = focus_only_terms(doc, sel, mode)?;
                let matches = search_focus_only(&terms, &doc.id, &self.docs, &self.store, k)?;
                (terms.into_iter().map(QueryToken::Term).collect(), matches)
            }
            Method::OverallGlove => (Vec::new(), search_overall_glove(&doc.id, &self.docs, k)?),
            Method::OverallPurpMech => {
                let pool = DEFAULT_POOL.max(k);
                (Vec::new(), search_overall_purpmech(&doc.id, &self.purpmech, k, pool)?)
            }
        };
        Ok(SearchOutcome { query_tokens, matches })
    }
}
