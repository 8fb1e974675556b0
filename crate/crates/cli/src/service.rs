//! HTTP JSON API over a loaded [`Engine`].

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use analogon_core::{Document, FocusOnlyMode, FocusSelection, Match, Method, PropertyEntry, QueryToken, SearchError};
use serde::{Deserialize, Serialize};
use serde_json::json;

use analogon_core::engine::{Engine, EngineError};

#[derive(Clone)]
pub struct AppState {
    pub engine: Arc<Engine>,
    pub k_default: usize,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/products", get(list_products))
        .route("/products/{id}", get(product))
        .route("/terms/{lemma}/abstractions", get(abstractions))
        .route("/search", post(search))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": { "code": self.code, "message": self.message } }))).into_response()
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let status = match &e {
            EngineError::Search(SearchError::UnresolvableQuery(_)) => StatusCode::UNPROCESSABLE_ENTITY,
            EngineError::Query(_) | EngineError::Search(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}

#[derive(Serialize)]
struct ProductSummary {
    id: String,
    title: String,
}

async fn list_products(State(st): State<AppState>) -> Json<Vec<ProductSummary>> {
    Json(st.engine.corpus.iter().map(|d| ProductSummary { id: d.id.clone(), title: d.title.clone() }).collect())
}

async fn product(State(st): State<AppState>, Path(id): Path<String>) -> Result<Json<Document>, ApiError> {
    st.engine
        .corpus
        .get(&id)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown_document", format!("no product {id:?}")))
}

async fn abstractions(State(st): State<AppState>, Path(lemma): Path<String>) -> Json<Vec<PropertyEntry>> {
    Json(st.engine.kb.abstractions_for(&lemma.to_lowercase()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchRequest {
    pub selection: FocusSelection,
    #[serde(default)]
    pub method: Option<String>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub focus_only_mode: FocusOnlyMode,
}

#[derive(Debug, Serialize)]
struct MatchView<'a> {
    doc_id: &'a str,
    score: f64,
    rank: usize,
    method: Method,
    matched_properties: Vec<PropertyHit<'a>>,
}

#[derive(Debug, Serialize)]
struct PropertyHit<'a> {
    lemma: &'a str,
    property: &'a str,
}

impl<'a> From<&'a Match> for MatchView<'a> {
    fn from(m: &'a Match) -> Self {
        MatchView {
            doc_id: &m.doc_id,
            score: m.score,
            rank: m.rank,
            method: m.method,
            matched_properties: m.matched_properties.iter().map(|(l, p)| PropertyHit { lemma: l, property: p }).collect(),
        }
    }
}

async fn search(State(st): State<AppState>, body: Result<Json<SearchRequest>, JsonRejection>) -> Result<Response, ApiError> {
    let Json(req) = body.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", e.body_text()))?;
    let method: Method = match req.method.as_deref() {
        Some(m) => m.parse().map_err(|e: SearchError| ApiError::new(StatusCode::BAD_REQUEST, e.code(), e.to_string()))?,
        None => Method::FocusAbstracted,
    };
    let k = req.k.unwrap_or(st.k_default);
    let engine = Arc::clone(&st.engine);
    let outcome = tokio::task::spawn_blocking(move || engine.search(&req.selection, method, k, req.focus_only_mode))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    let matches: Vec<MatchView<'_>> = outcome.matches.iter().map(MatchView::from).collect();
    let tokens: &[QueryToken] = &outcome.query_tokens;
    Ok(Json(json!({ "method": method, "k": k, "query_tokens": tokens, "matches": matches })).into_response())
}
