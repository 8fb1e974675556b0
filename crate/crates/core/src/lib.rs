//! Focus-abstracted analogical search over product descriptions.
//!
//! A designer picks the sentences of a seed product that matter, flags
//! irrelevant terms to ignore, and swaps key terms for knowledge-base
//! properties. The corpus is then re-represented under those properties and
//! ranked by cosine similarity of averaged word vectors. The [`stats`]
//! module holds the analysis used to compare retrieval methods from human
//! ratings.

pub mod abstraction;
pub mod corpus;
pub mod embedding;
pub mod engine;
pub mod kb;
pub mod query;
pub mod search;
pub mod stats;

pub use abstraction::{abstract_corpus, AbstractedDocument, Replacement};
pub use corpus::{Analyzer, Corpus, CorpusError, Document, Pos, Sentence, Token};
pub use embedding::{cosine, DocVector, EmbeddingError, EmbeddingStore, VectorInput};
pub use engine::{Engine, EngineError, SearchOutcome};
pub use kb::{KbError, KnowledgeBase, PropertyEntry};
pub use query::{build_query, step2_terms, FocusOnlyMode, FocusQuery, FocusSelection, QueryError, QueryToken};
pub use search::{Match, Method, OverlapReport, PurposeMechanismVectors, SearchError};
