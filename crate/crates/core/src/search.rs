//! The four retrieval methods and the match overlap report.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::{abstract_corpus, AbstractedDocument};
use crate::corpus::{Corpus, Document};
use crate::embedding::{average_vector, corpus_tfidf_weights, cosine, DocVector, EmbeddingError, EmbeddingStore, VectorInput};
use crate::kb::KnowledgeBase;
use crate::query::FocusQuery;

pub const DEFAULT_K: usize = 10;
pub const DEFAULT_POOL: usize = 100;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("query vector cannot be resolved: {0}")]
    UnresolvableQuery(#[source] EmbeddingError),
    #[error("unknown document {0:?}")]
    UnknownDocument(String),
    #[error("no purpose/mechanism vectors for document {0:?}")]
    MissingVectors(String),
    #[error("candidate pool {pool} is smaller than k = {k}")]
    PoolTooSmall { pool: usize, k: usize },
    #[error("unknown method {0:?}")]
    UnknownMethod(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

impl SearchError {
    pub fn code(&self) -> &'static str {
        match self {
            SearchError::ZeroK => "invalid_k",
            SearchError::UnresolvableQuery(_) => "unresolvable_query",
            SearchError::UnknownDocument(_) => "unknown_document",
            SearchError::MissingVectors(_) => "missing_vectors",
            SearchError::PoolTooSmall { .. } => "pool_too_small",
            SearchError::UnknownMethod(_) => "unknown_method",
            SearchError::Io { .. } => "io",
            SearchError::Malformed { .. } => "malformed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    FocusAbstracted,
    FocusOnly,
    #[serde(rename = "overall-glove")]
    OverallGlove,
    #[serde(rename = "overall-purpmech")]
    OverallPurpMech,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::FocusAbstracted, Method::FocusOnly, Method::OverallGlove, Method::OverallPurpMech];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::FocusAbstracted => "focus-abstracted",
            Method::FocusOnly => "focus-only",
            Method::OverallGlove => "overall-glove",
            Method::OverallPurpMech => "overall-purpmech",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        match norm.as_str() {
            "focus-abstracted" | "focusabstracted" => Ok(Method::FocusAbstracted),
            "focus-only" | "focusonly" => Ok(Method::FocusOnly),
            "overall-glove" | "overallglove" => Ok(Method::OverallGlove),
            "overall-purpmech" | "overallpurpmech" => Ok(Method::OverallPurpMech),
            _ => Err(SearchError::UnknownMethod(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub doc_id: String,
    pub score: f64,
    pub rank: usize,
    pub method: Method,
    pub matched_properties: Vec<(String, String)>,
}

impl Match {
    /// One compact JSON line with the score printed to 9 decimals.
    pub fn to_json_line(&self) -> String {
        let props: Vec<serde_json::Value> = self
            .matched_properties
            .iter()
            .map(|(l, p)| serde_json::json!({ "lemma": l, "property": p }))
            .collect();
        format!(
            "{{\"method\":{},\"rank\":{},\"doc_id\":{},\"score\":{:.9},\"matched_properties\":{}}}",
            serde_json::Value::from(self.method.as_str()),
            self.rank,
            serde_json::Value::from(self.doc_id.as_str()),
            self.score,
            serde_json::Value::from(props),
        )
    }
}

/// Score descending, then doc id ascending.
fn by_rank(a: &(String, f64), b: &(String, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

fn top_k(mut scored: Vec<(String, f64)>, k: usize) -> Vec<(String, f64)> {
    scored.sort_by(by_rank);
    scored.truncate(k);
    scored
}

fn into_matches(ranked: Vec<(String, f64)>, method: Method) -> Vec<Match> {
    ranked
        .into_iter()
        .enumerate()
        .map(|(i, (doc_id, score))| Match { doc_id, score, rank: i + 1, method, matched_properties: Vec::new() })
        .collect()
}

fn check_k(k: usize) -> Result<(), SearchError> {
    if k == 0 {
        Err(SearchError::ZeroK)
    } else {
        Ok(())
    }
}

/// Averaged non-stopword word vectors for every document, in corpus order.
/// Documents with no resolvable word are kept as `None` and never returned.
#[derive(Debug, Clone)]
pub struct DocumentVectors {
    entries: Vec<(String, Option<DocVector>)>,
}

impl DocumentVectors {
    pub fn build(corpus: &Corpus, store: &EmbeddingStore) -> Self {
        let entries = corpus
            .documents()
            .par_iter()
            .map(|d| (d.id.clone(), document_vector(d, store).ok()))
            .collect();
        DocumentVectors { entries }
    }

    pub fn get(&self, id: &str) -> Option<&DocVector> {
        self.entries.iter().find(|(d, _)| d == id).and_then(|(_, v)| v.as_ref())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Ids of documents that had no resolvable word.
    pub fn unresolved(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().filter(|(_, v)| v.is_none()).map(|(id, _)| id.as_str())
    }

    fn score(&self, query: &DocVector, seed_id: &str) -> Vec<(String, f64)> {
        self.entries
            .par_iter()
            .filter(|(id, _)| id != seed_id)
            .filter_map(|(id, v)| v.as_ref().and_then(|v| cosine(query, v).ok()).map(|s| (id.clone(), s)))
            .collect()
    }
}

/// Normalized mean of the document's non-stopword word vectors.
pub fn document_vector(doc: &Document, store: &EmbeddingStore) -> Result<DocVector, EmbeddingError> {
    let inputs = doc.tokens().filter(|t| !t.is_stopword).map(|t| VectorInput::Word(&t.lemma));
    average_vector(store, inputs, None)?.vector.normalized()
}

fn query_vector<'a>(store: &EmbeddingStore, inputs: impl IntoIterator<Item = VectorInput<'a>>) -> Result<DocVector, SearchError> {
    average_vector(store, inputs, None)
        .and_then(|a| a.vector.normalized())
        .map_err(SearchError::UnresolvableQuery)
}

/// Scores pre-abstracted documents against the focus-abstracted query.
pub fn search_abstracted(
    query: &FocusQuery,
    abstracted: &[AbstractedDocument],
    store: &EmbeddingStore,
    k: usize,
) -> Result<Vec<Match>, SearchError> {
    check_k(k)?;
    let qv = query_vector(store, query.inputs())?;
    let seed = query.source.doc_id.as_str();
    let scored: Vec<(String, f64)> = abstracted
        .par_iter()
        .filter(|a| a.doc_id != seed)
        .filter_map(|a| {
            let v = average_vector(store, a.inputs(), None).ok()?.vector;
            cosine(&qv, &v).ok().map(|s| (a.doc_id.clone(), s))
        })
        .collect();
    let by_id: HashMap<&str, &AbstractedDocument> = abstracted.iter().map(|a| (a.doc_id.as_str(), a)).collect();
    let mut matches = into_matches(top_k(scored, k), Method::FocusAbstracted);
    for m in &mut matches {
        m.matched_properties = by_id[m.doc_id.as_str()].matched_properties();
    }
    Ok(matches)
}

pub fn search_focus_abstracted(
    query: &FocusQuery,
    corpus: &Corpus,
    kb: &KnowledgeBase,
    store: &EmbeddingStore,
    k: usize,
) -> Result<Vec<Match>, SearchError> {
    check_k(k)?;
    let abstracted = abstract_corpus(corpus, &query.properties(), kb);
    search_abstracted(query, &abstracted, store, k)
}

/// Keyword baseline: plain average of the focus lemmas against whole
/// documents.
pub fn search_focus_only<S: AsRef<str>>(
    lemmas: &[S],
    seed_id: &str,
    docs: &DocumentVectors,
    store: &EmbeddingStore,
    k: usize,
) -> Result<Vec<Match>, SearchError> {
    check_k(k)?;
    let qv = query_vector(store, lemmas.iter().map(|l| VectorInput::Word(l.as_ref())))?;
    Ok(into_matches(top_k(docs.score(&qv, seed_id), k), Method::FocusOnly))
}

/// Whole-document baseline: the seed's own averaged vector.
pub fn search_overall_glove(seed_id: &str, docs: &DocumentVectors, k: usize) -> Result<Vec<Match>, SearchError> {
    check_k(k)?;
    let seed = docs
        .entries
        .iter()
        .find(|(id, _)| id == seed_id)
        .ok_or_else(|| SearchError::UnknownDocument(seed_id.to_string()))?;
    let qv = seed.1.as_ref().ok_or(SearchError::UnresolvableQuery(EmbeddingError::EmptyVector))?;
    Ok(into_matches(top_k(docs.score(qv, seed_id), k), Method::OverallGlove))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "path", rename_all = "kebab-case")]
pub enum PmProvenance {
    LoadedFile(PathBuf),
    Fallback,
}

/// Per-document purpose and mechanism vectors, in corpus order.
#[derive(Debug, Clone)]
pub struct PurposeMechanismVectors {
    ids: Vec<String>,
    purpose: Vec<DocVector>,
    mechanism: Vec<DocVector>,
    pub provenance: PmProvenance,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PmRecord {
    id: String,
    purpose: Vec<f64>,
    mechanism: Vec<f64>,
}

impl PurposeMechanismVectors {
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn purpose(&self, id: &str) -> Option<&DocVector> {
        self.index_of(id).map(|i| &self.purpose[i])
    }

    pub fn mechanism(&self, id: &str) -> Option<&DocVector> {
        self.index_of(id).map(|i| &self.mechanism[i])
    }

    fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|d| d == id)
    }

    /// Fails with the first corpus id that has no vectors.
    pub fn check_coverage(&self, corpus: &Corpus) -> Result<(), SearchError> {
        let have: BTreeSet<&str> = self.ids.iter().map(String::as_str).collect();
        match corpus.iter().find(|d| !have.contains(d.id.as_str())) {
            Some(d) => Err(SearchError::MissingVectors(d.id.clone())),
            None => Ok(()),
        }
    }
}

/// Reads `{"id", "purpose", "mechanism"}` lines and checks that every corpus
/// document is covered and that dimensions agree.
pub fn read_purpose_mechanism<R: BufRead>(reader: R, corpus: &Corpus, path: &Path) -> Result<PurposeMechanismVectors, SearchError> {
    let mut ids = Vec::new();
    let mut purpose = Vec::new();
    let mut mechanism = Vec::new();
    let mut dims: Option<(usize, usize)> = None;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let malformed = |message: String| SearchError::Malformed { line: line_no, message };
        let line = line.map_err(|e| malformed(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PmRecord = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        let d = (rec.purpose.len(), rec.mechanism.len());
        if d.0 == 0 || d.1 == 0 {
            return Err(malformed("empty vector".into()));
        }
        match dims {
            None => dims = Some(d),
            Some(expected) if expected != d => {
                return Err(malformed(format!("dimensions {d:?} differ from {expected:?}")));
            }
            Some(_) => {}
        }
        if ids.contains(&rec.id) {
            return Err(malformed(format!("duplicate id {:?}", rec.id)));
        }
        ids.push(rec.id);
        purpose.push(DocVector::new(rec.purpose));
        mechanism.push(DocVector::new(rec.mechanism));
    }
    let pm = PurposeMechanismVectors { ids, purpose, mechanism, provenance: PmProvenance::LoadedFile(path.to_path_buf()) };
    pm.check_coverage(corpus)?;
    Ok(pm)
}

pub fn load_purpose_mechanism(path: impl AsRef<Path>, corpus: &Corpus) -> Result<PurposeMechanismVectors, SearchError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| SearchError::Io { path: path.to_path_buf(), source })?;
    read_purpose_mechanism(BufReader::new(file), corpus, path)
}

/// Stand-in vectors from word embeddings: TF-IDF weighted mean for purpose,
/// plain mean for mechanism. Documents with no resolvable word are left out.
pub fn fallback_purpose_mechanism(corpus: &Corpus, store: &EmbeddingStore) -> PurposeMechanismVectors {
    let weights = corpus_tfidf_weights(corpus);
    let rows: Vec<Option<(String, DocVector, DocVector)>> = corpus
        .documents()
        .par_iter()
        .map(|d| {
            let inputs = || d.content_lemmas().map(VectorInput::Word);
            let mechanism = average_vector(store, inputs(), None).ok()?.vector;
            let purpose = average_vector(store, inputs(), Some(&weights[&d.id]))
                .map(|a| a.vector)
                .unwrap_or_else(|_| mechanism.clone());
            Some((d.id.clone(), purpose, mechanism))
        })
        .collect();
    let mut pm = PurposeMechanismVectors { ids: Vec::new(), purpose: Vec::new(), mechanism: Vec::new(), provenance: PmProvenance::Fallback };
    for (id, p, m) in rows.into_iter().flatten() {
        pm.ids.push(id);
        pm.purpose.push(p);
        pm.mechanism.push(m);
    }
    pm
}

/// Purpose-similar matches diversified by mechanism.
///
/// The `pool` documents closest in purpose are candidates. The first pick is
/// the closest in purpose; each further pick maximizes its smallest
/// mechanism distance (1 - cosine) to the picks so far, ties going to the
/// higher purpose score and then the smaller doc id. The picks are returned
/// ranked by purpose score.
pub fn search_overall_purpmech(
    seed_id: &str,
    pm: &PurposeMechanismVectors,
    k: usize,
    pool: usize,
) -> Result<Vec<Match>, SearchError> {
    check_k(k)?;
    if pool < k {
        return Err(SearchError::PoolTooSmall { pool, k });
    }
    let seed = pm.purpose(seed_id).ok_or_else(|| SearchError::MissingVectors(seed_id.to_string()))?;
    let scored: Vec<(String, f64)> = pm
        .ids
        .par_iter()
        .zip(pm.purpose.par_iter())
        .filter(|(id, _)| id.as_str() != seed_id)
        .filter_map(|(id, v)| cosine(seed, v).ok().map(|s| (id.clone(), s)))
        .collect();
    let candidates = top_k(scored, pool);
    let picks = diversify(&candidates, k, |id| pm.mechanism(id).expect("candidate has vectors"));
    let mut chosen: Vec<(String, f64)> = picks.into_iter().map(|i| candidates[i].clone()).collect();
    chosen.sort_by(by_rank);
    Ok(into_matches(chosen, Method::OverallPurpMech))
}

/// Greedy max-min selection over candidates already sorted by rank.
/// Returns candidate indices in pick order.
fn diversify<'a>(candidates: &[(String, f64)], k: usize, mechanism: impl Fn(&str) -> &'a DocVector) -> Vec<usize> {
    let mut picks: Vec<usize> = Vec::new();
    let mut min_dist = vec![f64::INFINITY; candidates.len()];
    while picks.len() < k.min(candidates.len()) {
        let best = (0..candidates.len())
            .filter(|i| !picks.contains(i))
            .max_by(|&a, &b| {
                min_dist[a]
                    .total_cmp(&min_dist[b])
                    .then_with(|| by_rank(&candidates[b], &candidates[a]))
            })
            .expect("candidates remain");
        picks.push(best);
        let chosen = mechanism(&candidates[best].0);
        for (i, d) in min_dist.iter_mut().enumerate() {
            let dist = 1.0 - cosine(chosen, mechanism(&candidates[i].0)).unwrap_or(0.0);
            *d = d.min(dist);
        }
    }
    picks
}

/// Match lists for one scenario, keyed by method.
pub type ScenarioMatches = BTreeMap<Method, Vec<String>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairOverlap {
    pub a: Method,
    pub b: Method,
    pub shared: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OverlapReport {
    pub unique_count: usize,
    pub total_count: usize,
    pub pairwise: Vec<PairOverlap>,
}

impl fmt::Display for OverlapReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} unique matches out of {}", self.unique_count, self.total_count)
    }
}

/// Counts distinct `(scenario, doc)` pairs across methods. The total is
/// methods x scenarios x k.
pub fn overlap_report(scenarios: &BTreeMap<String, ScenarioMatches>, k: usize) -> OverlapReport {
    let methods: BTreeSet<Method> = scenarios.values().flat_map(|m| m.keys().copied()).collect();
    let unique: BTreeSet<(&str, &str)> = scenarios
        .iter()
        .flat_map(|(s, by_method)| by_method.values().flatten().map(move |d| (s.as_str(), d.as_str())))
        .collect();
    let methods: Vec<Method> = methods.into_iter().collect();
    let mut pairwise = Vec::new();
    for (i, &a) in methods.iter().enumerate() {
        for &b in &methods[i + 1..] {
            let shared = scenarios
                .values()
                .map(|by_method| {
                    let empty = Vec::new();
                    let sa: BTreeSet<&String> = by_method.get(&a).unwrap_or(&empty).iter().collect();
                    by_method.get(&b).unwrap_or(&empty).iter().collect::<BTreeSet<_>>().intersection(&sa).count()
                })
                .sum();
            pairwise.push(PairOverlap { a, b, shared });
        }
    }
    OverlapReport { unique_count: unique.len(), total_count: methods.len() * scenarios.len() * k, pairwise }
}
