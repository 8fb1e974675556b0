//! Product description ingestion: sentence segmentation, tagging and
//! lemmatization of line-delimited JSON corpora.

mod stopwords;
mod tagger;
mod text;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use stopwords::{is_stopword, stopwords, STOPWORD_COUNT};
pub use tagger::{lemmatize, pos_tag, Analyzer, Pos, UnknownPos};
pub use text::{segment_sentences, tokenize};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate document id {id:?}")]
    DuplicateId { line: usize, id: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub pos: Pos,
    pub is_stopword: bool,
}

impl Token {
    /// Nouns, verbs and adjectives that are not stopwords.
    pub fn is_content(&self) -> bool {
        self.pos.is_content() && !self.is_stopword
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub raw: String,
    /// Byte offset of `raw` within the document text.
    pub offset: usize,
    pub tokens: Vec<Token>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub text: String,
    pub sentences: Vec<Sentence>,
}

impl Document {
    /// Segments, tokenizes and tags `text` with `analyzer`.
    pub fn analyze(id: impl Into<String>, title: impl Into<String>, text: impl Into<String>, analyzer: &Analyzer) -> Self {
        let text = text.into();
        let sentences = text::sentence_spans(&text)
            .into_iter()
            .enumerate()
            .map(|(index, span)| {
                let surfaces = tokenize(span.text);
                let tags = analyzer.pos_tag(&surfaces);
                Sentence {
                    index,
                    raw: span.text.to_string(),
                    offset: span.start,
                    tokens: build_tokens(surfaces.into_iter().zip(tags), analyzer),
                }
            })
            .collect();
        Document { id: id.into(), title: title.into(), text, sentences }
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flat_map(|s| s.tokens.iter())
    }

    /// Lemmas of every non-stopword token, in document order.
    pub fn content_lemmas(&self) -> impl Iterator<Item = &str> {
        self.tokens().filter(|t| !t.is_stopword).map(|t| t.lemma.as_str())
    }

    /// The record this document was loaded from, as one JSON line.
    pub fn to_record_line(&self) -> String {
        serde_json::to_string(&RecordOut { id: &self.id, title: &self.title, text: &self.text })
            .expect("string fields always serialize")
    }
}

fn build_tokens(tagged: impl IntoIterator<Item = (String, Pos)>, analyzer: &Analyzer) -> Vec<Token> {
    tagged
        .into_iter()
        .map(|(surface, pos)| {
            let lemma = analyzer.lemmatize(&surface, pos);
            let is_stopword = is_stopword(&surface) || is_stopword(&lemma);
            Token { surface, lemma, pos, is_stopword }
        })
        .collect()
}

#[derive(Serialize)]
struct RecordOut<'a> {
    id: &'a str,
    title: &'a str,
    text: &'a str,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordIn {
    id: String,
    #[serde(default)]
    title: String,
    text: String,
    #[serde(default)]
    tokens: Option<Vec<Vec<(String, String)>>>,
}

/// An ordered collection of documents with unique ids.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    docs: Vec<Document>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fails with the offending id if two documents share one.
    pub fn from_documents(docs: Vec<Document>) -> Result<Self, String> {
        let mut corpus = Corpus::new();
        for doc in docs {
            corpus.push(doc)?;
        }
        Ok(corpus)
    }

    pub fn push(&mut self, doc: Document) -> Result<(), String> {
        if self.by_id.contains_key(&doc.id) {
            return Err(doc.id);
        }
        self.by_id.insert(doc.id.clone(), self.docs.len());
        self.docs.push(doc);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.by_id.get(id).map(|&i| &self.docs[i])
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Document> {
        self.docs.iter()
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Document;
    type IntoIter = std::slice::Iter<'a, Document>;

    fn into_iter(self) -> Self::IntoIter {
        self.docs.iter()
    }
}

fn parse_record(line_no: usize, line: &str, analyzer: &Analyzer) -> Result<Document, CorpusError> {
    let malformed = |message: String| CorpusError::Malformed { line: line_no, message };
    let record: RecordIn = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
    if record.id.trim().is_empty() {
        return Err(malformed("empty id".into()));
    }
    let mut doc = Document::analyze(record.id, record.title, record.text, analyzer);
    if let Some(tagged) = record.tokens {
        if tagged.len() != doc.sentences.len() {
            return Err(malformed(format!(
                "{} pre-tagged sentences but the text segments into {}",
                tagged.len(),
                doc.sentences.len()
            )));
        }
        for (sentence, pairs) in doc.sentences.iter_mut().zip(tagged) {
            let mut out = Vec::with_capacity(pairs.len());
            for (surface, tag) in pairs {
                if surface.is_empty() {
                    return Err(malformed(format!("empty token in sentence {}", sentence.index)));
                }
                let pos: Pos = tag.parse().map_err(|e: UnknownPos| malformed(e.to_string()))?;
                out.push((surface, pos));
            }
            sentence.tokens = build_tokens(out, analyzer);
        }
    }
    Ok(doc)
}

/// Parses a corpus from any buffered reader, stopping at the first error.
pub fn read_corpus<R: BufRead>(reader: R, analyzer: &Analyzer) -> Result<Corpus, CorpusError> {
    let mut corpus = Corpus::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| CorpusError::Malformed { line: line_no, message: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        let doc = parse_record(line_no, &line, analyzer)?;
        corpus
            .push(doc)
            .map_err(|id| CorpusError::DuplicateId { line: line_no, id })?;
    }
    Ok(corpus)
}

pub fn load_corpus(path: impl AsRef<Path>, analyzer: &Analyzer) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    read_corpus(BufReader::new(file), analyzer)
}

/// Checks every record and returns all errors instead of stopping at the
/// first one. Records that fail are not counted toward duplicate detection.
pub fn validate_corpus<R: BufRead>(reader: R, analyzer: &Analyzer) -> (usize, Vec<CorpusError>) {
    let mut seen = HashMap::new();
    let mut errors = Vec::new();
    let mut valid = 0;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                errors.push(CorpusError::Malformed { line: line_no, message: e.to_string() });
                continue;
            }
        };
        if line.trim().is_empty() {
            continue;
        }
        match parse_record(line_no, &line, analyzer) {
            Ok(doc) => {
                if seen.insert(doc.id.clone(), line_no).is_some() {
                    errors.push(CorpusError::DuplicateId { line: line_no, id: doc.id });
                } else {
                    valid += 1;
                }
            }
            Err(e) => errors.push(e),
        }
    }
    (valid, errors)
}
