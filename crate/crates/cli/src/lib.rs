//! Batch commands and the HTTP service for analogical product search.

pub mod config;
pub mod service;

pub use analogon_core::engine::{Engine, EngineError, SearchOutcome};
pub use config::{ConfigError, ServerConfig, Settings};
pub use service::{router, AppState};
