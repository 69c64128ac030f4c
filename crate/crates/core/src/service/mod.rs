//! HTTP+JSON review service for data stewards.
//!
//! Artifacts (graph, model, text corpus, match scores, run record) are loaded
//! once and only read. Every mutation goes through the review log behind a
//! single lock and is acknowledged after the append is synced.

pub mod store;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;
use tokio::sync::Mutex;

use crate::explain::{explain_link, ExplainConfig, TextIndex};
use crate::graph::{NodeId, PropertyGraph};
use crate::graphsheet::{render_graphsheet, RunRecord, SheetFormat};
use crate::linkpred::{io as model_io, watchlist_predict, LinkModel, LinkPredError, WatchlistOptions};
use crate::matching::{classify, read_match_scores, Decision, MatchScore, Thresholds};
use store::{ReviewStore, Status, StoreError, Verdict};

pub use store::{LogEntry, PredictionRecord, ReviewView};

pub const STEWARD_HEADER: &str = "x-steward-id";
pub const RUN_RECORD_FILE: &str = "run_record.json";
pub const DEFAULT_PAGE: usize = 50;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("required artifact missing: {0}")]
    ArtifactMissing(PathBuf),
    #[error("address {0} is already in use")]
    PortInUse(SocketAddr),
    #[error("could not load {path}: {message}")]
    Artifact { path: PathBuf, message: String },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Where the service finds its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServeConfig {
    pub graph_dir: PathBuf,
    pub model_dir: PathBuf,
    pub corpus: PathBuf,
    pub match_scores: PathBuf,
    pub review_log: PathBuf,
    pub addr: SocketAddr,
    pub ui_dir: Option<PathBuf>,
    #[serde(default)]
    pub explain: ExplainConfig,
    #[serde(default)]
    pub thresholds: Thresholds,
}

/// Read-only inputs of the service.
#[derive(Debug)]
pub struct Artifacts {
    pub graph: PropertyGraph,
    pub model: LinkModel,
    pub index: TextIndex,
    pub scores: Vec<MatchScore>,
    pub run_record: Option<RunRecord>,
}

fn require(path: &Path) -> Result<(), ServiceError> {
    if path.exists() {
        Ok(())
    } else {
        Err(ServiceError::ArtifactMissing(path.to_path_buf()))
    }
}

fn load_err(path: &Path, e: impl std::fmt::Display) -> ServiceError {
    ServiceError::Artifact { path: path.to_path_buf(), message: e.to_string() }
}

impl Artifacts {
    pub fn load(config: &ServeConfig) -> Result<Self, ServiceError> {
        let model_file = config.model_dir.join(model_io::MODEL_FILE);
        for p in [&config.graph_dir, &model_file, &config.corpus, &config.match_scores] {
            require(p)?;
        }
        let graph = PropertyGraph::load(&config.graph_dir).map_err(|e| load_err(&config.graph_dir, e))?;
        let model = model_io::load(&config.model_dir).map_err(|e| load_err(&model_file, e))?;
        let index = TextIndex::load(&config.corpus).map_err(|e| load_err(&config.corpus, e))?;
        let scores = read_match_scores(&config.match_scores).map_err(|e| load_err(&config.match_scores, e))?;
        let record_path = config.model_dir.join(RUN_RECORD_FILE);
        let run_record = if record_path.exists() {
            let text = std::fs::read_to_string(&record_path)?;
            Some(RunRecord::from_json(&text).map_err(|e| load_err(&record_path, e))?)
        } else {
            None
        };
        Ok(Artifacts { graph, model, index, scores, run_record })
    }
}

pub struct AppState {
    pub artifacts: Arc<Artifacts>,
    pub store: Mutex<ReviewStore>,
    pub explain: ExplainConfig,
}

impl AppState {
    pub fn new(artifacts: Artifacts, store: ReviewStore, explain: ExplainConfig) -> Arc<Self> {
        Self::new_shared(Arc::new(artifacts), store, explain)
    }

    /// Like [`AppState::new`] for artifacts already shared with other states.
    pub fn new_shared(artifacts: Arc<Artifacts>, store: ReviewStore, explain: ExplainConfig) -> Arc<Self> {
        Arc::new(AppState { artifacts, store: Mutex::new(store), explain })
    }
}

/// Error body: `{"error": code, "message": text}`.
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

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"error": self.code, "message": self.message}))).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound(_) => ApiError::not_found(e.to_string()),
            StoreError::AlreadyDecided(_) => ApiError::new(StatusCode::CONFLICT, "already_decided", e.to_string()),
            StoreError::InvalidThresholds { .. } => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_thresholds", e.to_string())
            }
            other => ApiError::internal(other.to_string()),
        }
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/predictions", get(list_predictions))
        .route("/predictions/{id}", get(get_prediction))
        .route("/predictions/{id}/explanation", get(get_explanation))
        .route("/predictions/{id}/feedback", post(post_feedback))
        .route("/watchlist", post(post_watchlist))
        .route("/thresholds", get(get_thresholds).put(put_thresholds))
        .route("/graphsheet", get(get_graphsheet))
        .route("/nodes/{id}", get(get_node))
        .with_state(state)
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({"status": "ok", "version": env!("CARGO_PKG_VERSION")}))
}

#[derive(Debug, Deserialize)]
struct ListQuery {
    status: Option<String>,
    limit: Option<usize>,
    offset: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PredictionPage {
    pub total: usize,
    pub offset: usize,
    pub items: Vec<PredictionRecord>,
}

async fn list_predictions(State(s): State<Arc<AppState>>, Query(q): Query<ListQuery>) -> ApiResult<Json<PredictionPage>> {
    let status = q
        .status
        .filter(|v| !v.is_empty() && v != "all")
        .map(|v| v.parse::<Status>())
        .transpose()
        .map_err(ApiError::bad_request)?;
    let offset = q.offset.unwrap_or(0);
    let (total, items) = s.store.lock().await.list(status, offset, q.limit.unwrap_or(DEFAULT_PAGE));
    Ok(Json(PredictionPage { total, offset, items }))
}

async fn find(s: &AppState, id: u64) -> ApiResult<PredictionRecord> {
    s.store.lock().await.get(id).cloned().ok_or_else(|| ApiError::not_found(format!("prediction {id} not found")))
}

async fn get_prediction(State(s): State<Arc<AppState>>, UrlPath(id): UrlPath<u64>) -> ApiResult<Json<PredictionRecord>> {
    Ok(Json(find(&s, id).await?))
}

async fn get_explanation(State(s): State<Arc<AppState>>, UrlPath(id): UrlPath<u64>) -> ApiResult<Response> {
    let record = find(&s, id).await?;
    let a = &s.artifacts;
    let bundle = explain_link(&a.graph, &a.index, &[record.as_prediction()], record.u, record.v, &s.explain)
        .map_err(|e| ApiError::not_found(e.to_string()))?;
    Ok(Json(bundle).into_response())
}

#[derive(Debug, Deserialize)]
struct FeedbackBody {
    decision: Verdict,
    note: Option<String>,
}

fn steward(headers: &HeaderMap) -> Option<String> {
    headers.get(STEWARD_HEADER).and_then(|v| v.to_str().ok()).map(str::to_string)
}

async fn post_feedback(
    State(s): State<Arc<AppState>>,
    UrlPath(id): UrlPath<u64>,
    headers: HeaderMap,
    Json(body): Json<FeedbackBody>,
) -> ApiResult<Json<PredictionRecord>> {
    let record = s.store.lock().await.decide(id, body.decision, body.note, steward(&headers))?;
    Ok(Json(record))
}

#[derive(Debug, Deserialize)]
struct WatchlistBody {
    node_ids: Vec<u32>,
    top_k: Option<usize>,
    max_hops: Option<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WatchlistResult {
    /// Predictions returned by the model for this watchlist.
    pub candidates: usize,
    /// Newly queued records; pairs already in the queue are skipped.
    pub enqueued: Vec<PredictionRecord>,
    pub pending: usize,
}

async fn post_watchlist(State(s): State<Arc<AppState>>, Json(body): Json<WatchlistBody>) -> ApiResult<Json<WatchlistResult>> {
    if body.node_ids.is_empty() {
        return Err(ApiError::bad_request("node_ids must not be empty"));
    }
    let unknown: Vec<u32> = body.node_ids.iter().copied().filter(|&i| !s.artifacts.graph.contains(NodeId(i))).collect();
    if !unknown.is_empty() {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "unknown_node_ids",
            format!("unknown node ids: {unknown:?}"),
        ));
    }
    let ids: Vec<NodeId> = body.node_ids.iter().copied().map(NodeId).collect();
    let mut opts = WatchlistOptions::default();
    if let Some(k) = body.top_k {
        opts.top_k = k;
    }
    opts.max_hops = body.max_hops;
    let artifacts = Arc::clone(&s.artifacts);
    let preds = tokio::task::spawn_blocking(move || watchlist_predict(&artifacts.model, &artifacts.graph, &ids, opts))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(|e| match e {
            LinkPredError::EmptyWatchlist | LinkPredError::UnknownNode(_) => ApiError::bad_request(e.to_string()),
            other => ApiError::internal(other.to_string()),
        })?;
    let mut store = s.store.lock().await;
    let enqueued = store.enqueue(&preds)?;
    let (pending, _) = store.list(Some(Status::Pending), 0, 0);
    Ok(Json(WatchlistResult { candidates: preds.len(), enqueued, pending }))
}

/// How many stored match scores fall into each decision band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DecisionCounts {
    pub link: usize,
    pub review: usize,
    pub no_link: usize,
}

pub fn decision_counts(scores: &[MatchScore], t: &Thresholds) -> DecisionCounts {
    let mut c = DecisionCounts::default();
    for s in scores {
        match classify(s.total, t) {
            Decision::Link => c.link += 1,
            Decision::ClericalReview => c.review += 1,
            Decision::NoLink => c.no_link += 1,
        }
    }
    c
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ThresholdState {
    pub thresholds: Thresholds,
    pub counts: DecisionCounts,
    pub scored_pairs: usize,
}

fn threshold_state(s: &AppState, t: Thresholds) -> ThresholdState {
    ThresholdState {
        thresholds: t,
        counts: decision_counts(&s.artifacts.scores, &t),
        scored_pairs: s.artifacts.scores.len(),
    }
}

async fn get_thresholds(State(s): State<Arc<AppState>>) -> Json<ThresholdState> {
    let t = s.store.lock().await.view().thresholds;
    Json(threshold_state(&s, t))
}

async fn put_thresholds(
    State(s): State<Arc<AppState>>,
    headers: HeaderMap,
    Json(t): Json<Thresholds>,
) -> ApiResult<Json<ThresholdState>> {
    if !t.autolink.is_finite() || !t.review.is_finite() {
        return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_thresholds", "thresholds must be finite"));
    }
    let applied = s.store.lock().await.set_thresholds(t, steward(&headers))?;
    Ok(Json(threshold_state(&s, applied)))
}

#[derive(Debug, Deserialize)]
struct SheetQuery {
    format: Option<String>,
}

async fn get_graphsheet(State(s): State<Arc<AppState>>, Query(q): Query<SheetQuery>) -> ApiResult<Response> {
    let format: SheetFormat = q.format.as_deref().unwrap_or("json").parse().map_err(ApiError::bad_request)?;
    let record = s.artifacts.run_record.as_ref().ok_or_else(|| ApiError::not_found("no run record for this model"))?;
    let body = render_graphsheet(record, format).map_err(|e| ApiError::internal(e.to_string()))?;
    let content_type = match format {
        SheetFormat::Json => "application/json",
        SheetFormat::Markdown => "text/markdown; charset=utf-8",
    };
    Ok(([(header::CONTENT_TYPE, content_type)], body).into_response())
}

async fn get_node(State(s): State<Arc<AppState>>, UrlPath(id): UrlPath<u32>) -> ApiResult<Json<serde_json::Value>> {
    let g = &s.artifacts.graph;
    let node = g.node(NodeId(id)).ok_or_else(|| ApiError::not_found(format!("node {id} not found")))?;
    let neighbors: Vec<serde_json::Value> = g
        .neighbors(node.id)
        .iter()
        .map(|&n| json!({"id": n, "relations": g.relations_between(node.id, n)}))
        .collect();
    Ok(Json(json!({"node": node, "degree": neighbors.len(), "neighbors": neighbors})))
}

/// Loads artifacts, replays the review log and serves until the task is dropped.
pub async fn serve(config: ServeConfig) -> Result<(), ServiceError> {
    let artifacts = Artifacts::load(&config)?;
    let store = ReviewStore::open(&config.review_log, config.thresholds)?;
    let state = AppState::new(artifacts, store, config.explain);
    let mut app = router(state);
    if let Some(dir) = &config.ui_dir {
        require(dir)?;
        app = app.fallback_service(tower_http::services::ServeDir::new(dir));
    }
    let listener = tokio::net::TcpListener::bind(config.addr).await.map_err(|e| match e.kind() {
        std::io::ErrorKind::AddrInUse => ServiceError::PortInUse(config.addr),
        _ => ServiceError::Io(e),
    })?;
    tracing::info!(addr = %config.addr, "serving");
    axum::serve(listener, app).await?;
    Ok(())
}
