//! HTTP API consumed by the writing UI.
//!
//! | route | |
//! |---|---|
//! | `POST /suggest` | ranked candidate lines with constraint reports |
//! | `GET /rhymes?word=&k=` | most frequent rhymes from the corpus dictionary |
//! | `POST /sessions` | start a writing session |
//! | `GET /sessions/{id}` | session with its accepted lines |
//! | `POST /sessions/{id}/accept` | append an accepted line |
//! | `GET /health` | backend reachability and dictionary size |
//!
//! Errors are `{"error": "..."}` with 400 for malformed requests, 404 for
//! unknown words and sessions, 409 for conflicting constraints and 503 when
//! the generation backend is down.

use std::future::Future;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use lyricraft_core::generation::{self, GenerationBackend, GenerationError, SuggestionRequest, SuggestionSet};
use lyricraft_core::rhyme::{RankedRhyme, RhymeDictionary, RhymeError, Rhymer, DEFAULT_TOP_RHYMES};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::session::{Session, SessionError, SessionSettings, SessionStore};

pub struct AppState {
    pub backend: Arc<dyn GenerationBackend>,
    pub rhymer: Arc<Rhymer>,
    pub dictionary: Arc<RhymeDictionary>,
    pub sessions: Arc<SessionStore>,
    /// Base seed; request `n` without its own seed uses `seed + n`.
    pub seed: u64,
    requests: AtomicU64,
}

impl AppState {
    pub fn new(
        backend: Arc<dyn GenerationBackend>,
        rhymer: Arc<Rhymer>,
        dictionary: Arc<RhymeDictionary>,
        sessions: Arc<SessionStore>,
        seed: u64,
    ) -> Self {
        AppState { backend, rhymer, dictionary, sessions, seed, requests: AtomicU64::new(0) }
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

impl From<GenerationError> for ApiError {
    fn from(e: GenerationError) -> Self {
        let status = match &e {
            GenerationError::BackendUnavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
            GenerationError::MalformedResponse(_) => StatusCode::BAD_GATEWAY,
            GenerationError::InvalidRequest(_) => StatusCode::BAD_REQUEST,
            GenerationError::ConstraintConflict => StatusCode::CONFLICT,
            GenerationError::UnknownWord(_) => StatusCode::NOT_FOUND,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, e.body_text())
    }
}

impl From<crate::Error> for ApiError {
    fn from(e: crate::Error) -> Self {
        log::error!("{e}");
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match e {
            SessionError::UnknownSession(_) => StatusCode::NOT_FOUND,
            SessionError::EmptyLine => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e.to_string())
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Deserialize)]
pub struct SuggestBody {
    #[serde(flatten)]
    pub request: SuggestionRequest,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Fills in the session's syllable target, force-rhyme and `k` defaults.
    #[serde(default)]
    pub session_id: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SuggestResponse {
    pub seed: u64,
    #[serde(flatten)]
    pub suggestions: SuggestionSet,
}

async fn suggest(
    State(state): State<Arc<AppState>>,
    body: Result<Json<serde_json::Value>, JsonRejection>,
) -> ApiResult<Json<SuggestResponse>> {
    let Json(raw) = body?;
    let explicit_k = raw.get("k").is_some();
    let body: SuggestBody =
        serde_json::from_value(raw).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
    let mut req = body.request;
    if let Some(id) = &body.session_id {
        let session = state.sessions.get(id).ok_or_else(|| SessionError::UnknownSession(id.clone()))?;
        req.syllable_target = req.syllable_target.or(session.settings.syllable_target);
        req.force_rhyme |= session.settings.force_rhyme && req.ending_word.is_none();
        if !explicit_k {
            req.k = session.settings.k;
        }
    }
    req.validate()?;
    let seed = body.seed.unwrap_or_else(|| state.seed.wrapping_add(state.requests.fetch_add(1, Ordering::Relaxed)));
    let worker = Arc::clone(&state);
    let set = tokio::task::spawn_blocking(move || {
        let mut rng = lyricraft_core::seeded_rng(seed);
        generation::suggest(&req, &worker.backend, &worker.dictionary, &worker.rhymer, &mut rng)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(SuggestResponse { seed, suggestions: set }))
}

#[derive(Debug, Deserialize)]
pub struct RhymesParams {
    pub word: String,
    pub k: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RhymesResponse {
    pub word: String,
    pub rhyme_key: String,
    pub rhymes: Vec<RankedRhyme>,
}

async fn rhymes(
    State(state): State<Arc<AppState>>,
    params: Result<Query<RhymesParams>, QueryRejection>,
) -> ApiResult<Json<RhymesResponse>> {
    let Query(params) = params?;
    let word = lyricraft_core::phonetics::normalize_token(&params.word);
    if word.is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "word must not be empty"));
    }
    let k = params.k.unwrap_or(DEFAULT_TOP_RHYMES);
    let not_found = |e: RhymeError| ApiError::new(StatusCode::NOT_FOUND, e.to_string());
    let key = state.rhymer.rhyme_key(&word).map_err(not_found)?;
    let rhymes = state.dictionary.top_rhymes(&state.rhymer, &word, k).map_err(not_found)?;
    Ok(Json(RhymesResponse { word, rhyme_key: key.to_string(), rhymes }))
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    body: Option<Json<SessionSettings>>,
) -> ApiResult<(StatusCode, Json<Session>)> {
    let settings = body.map(|Json(s)| s).unwrap_or_default();
    let store = Arc::clone(&state.sessions);
    let session = tokio::task::spawn_blocking(move || store.create(settings))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok((StatusCode::CREATED, Json(session)))
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Session>> {
    state.sessions.get(&id).map(Json).ok_or_else(|| SessionError::UnknownSession(id).into())
}

#[derive(Debug, Deserialize)]
pub struct AcceptBody {
    pub line: String,
}

async fn accept_line(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<AcceptBody>, JsonRejection>,
) -> ApiResult<Json<Session>> {
    let Json(body) = body?;
    let store = Arc::clone(&state.sessions);
    let session = tokio::task::spawn_blocking(move || store.accept(&id, &body.line))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))???;
    Ok(Json(session))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub backend: String,
    pub backend_reachable: bool,
    pub rhyme_buckets: usize,
    pub sessions: usize,
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Health> {
    let probe = Arc::clone(&state.backend);
    let reachable = tokio::task::spawn_blocking(move || probe.is_available()).await.unwrap_or(false);
    Json(Health {
        status: if reachable { "ok" } else { "degraded" }.to_string(),
        backend: state.backend.id().to_string(),
        backend_reachable: reachable,
        rhyme_buckets: state.dictionary.bucket_count(),
        sessions: state.sessions.len(),
    })
}

/// Allowed browser origins; `*` allows any.
#[derive(Debug, Clone, Default)]
pub struct CorsConfig {
    pub origins: Vec<String>,
}

fn cors_layer(cfg: &CorsConfig) -> Option<CorsLayer> {
    if cfg.origins.is_empty() {
        return None;
    }
    let allow = if cfg.origins.iter().any(|o| o == "*") {
        AllowOrigin::any()
    } else {
        AllowOrigin::list(cfg.origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()))
    };
    Some(
        CorsLayer::new()
            .allow_origin(allow)
            .allow_methods([Method::GET, Method::POST])
            .allow_headers([axum::http::header::CONTENT_TYPE]),
    )
}

pub fn router(state: Arc<AppState>, cors: &CorsConfig) -> Router {
    let router = Router::new()
        .route("/suggest", post(suggest))
        .route("/rhymes", get(rhymes))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/accept", post(accept_line))
        .route("/health", get(health))
        .with_state(state);
    match cors_layer(cors) {
        Some(layer) => router.layer(layer),
        None => router,
    }
}

/// Serves until `shutdown` resolves, then flushes the session log.
pub async fn serve<F>(
    listener: tokio::net::TcpListener,
    state: Arc<AppState>,
    cors: &CorsConfig,
    shutdown: F,
) -> std::io::Result<()>
where
    F: Future<Output = ()> + Send + 'static,
{
    let sessions = Arc::clone(&state.sessions);
    axum::serve(listener, router(state, cors)).with_graceful_shutdown(shutdown).await?;
    sessions.flush().map_err(std::io::Error::other)
}
