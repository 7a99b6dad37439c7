//! HTTP service for the annotation UI.
//!
//! | method | path | body | reply |
//! |---|---|---|---|
//! | GET | `/healthz` | | `{"status":"ok","sessions":n}` |
//! | POST | `/sessions?superpixels=N` | PNG or PPM bytes | [`SessionCreated`] |
//! | POST | `/sessions/{id}/segment` | [`SegmentRequest`] | [`SegmentReply`] |
//! | GET | `/sessions/{id}/mask.png` | | last mask, 0/255 grayscale PNG |
//! | DELETE | `/sessions/{id}` | | 204 |
//!
//! Masks travel as run-length lists of `[start, length]` over row-major
//! pixel indices. Errors are `{"error": message}` with 404 for unknown
//! sessions, 422 for unusable input and 409 while a segmentation of the
//! same session is running.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use cds_core::segmentation::{
    decode_image, segment_prepared, Affinity, Annotation, Diagnostics, PreparedImage, Run,
    SegmentationMask, SigmaStrategy, DEFAULT_SUPERPIXELS,
};
use cds_core::{Dynamics, Error, ExtractionSettings};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub superpixels: usize,
    pub sigma: SigmaStrategy,
    pub extraction: ExtractionSettings,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            superpixels: DEFAULT_SUPERPIXELS,
            sigma: SigmaStrategy::default(),
            extraction: ExtractionSettings::default(),
        }
    }
}

pub struct Session {
    pub prepared: PreparedImage,
    affinities: Mutex<HashMap<String, Arc<Affinity>>>,
    cache_hits: AtomicU64,
    busy: AtomicBool,
    last_mask: Mutex<Option<SegmentationMask>>,
}

/// Marks a session busy until dropped.
pub struct InFlight(Arc<Session>);

impl Drop for InFlight {
    fn drop(&mut self) {
        self.0.busy.store(false, Ordering::Release);
    }
}

impl Session {
    fn new(prepared: PreparedImage) -> Self {
        Self {
            prepared,
            affinities: Mutex::new(HashMap::new()),
            cache_hits: AtomicU64::new(0),
            busy: AtomicBool::new(false),
            last_mask: Mutex::new(None),
        }
    }

    /// Claims the session for one segmentation, or `None` if one is running.
    pub fn try_begin(self: &Arc<Self>) -> Option<InFlight> {
        self.busy
            .compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire)
            .ok()
            .map(|_| InFlight(Arc::clone(self)))
    }

    pub fn cache_hits(&self) -> u64 {
        self.cache_hits.load(Ordering::Relaxed)
    }

    /// Affinity for `strategy`, built once per session.
    fn affinity(&self, strategy: &SigmaStrategy) -> cds_core::Result<(Arc<Affinity>, bool)> {
        let key = serde_json::to_string(strategy)?;
        if let Some(a) = self.affinities.lock().unwrap().get(&key) {
            self.cache_hits.fetch_add(1, Ordering::Relaxed);
            return Ok((Arc::clone(a), true));
        }
        let a = Arc::new(self.prepared.affinity(strategy)?);
        self.affinities.lock().unwrap().insert(key, Arc::clone(&a));
        Ok((a, false))
    }
}

pub struct AppState {
    pub config: ServiceConfig,
    sessions: Mutex<HashMap<String, Arc<Session>>>,
    next_id: AtomicU64,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Arc<Self> {
        Arc::new(Self {
            config,
            sessions: Mutex::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        })
    }

    pub fn session(&self, id: &str) -> Option<Arc<Session>> {
        self.sessions.lock().unwrap().get(id).cloned()
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", delete(delete_session))
        .route("/sessions/{id}/segment", post(segment_session))
        .route("/sessions/{id}/mask.png", get(mask_png))
        .with_state(state)
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

fn not_found(id: &str) -> ApiError {
    ApiError(StatusCode::NOT_FOUND, format!("no session `{id}`"))
}

fn unprocessable(e: impl ToString) -> ApiError {
    ApiError(StatusCode::UNPROCESSABLE_ENTITY, e.to_string())
}

fn classify(e: Error) -> ApiError {
    match e {
        Error::Annotation(_) | Error::InvalidArgument(_) | Error::Json(_) | Error::Image(_) => {
            unprocessable(e)
        }
        other => ApiError(StatusCode::INTERNAL_SERVER_ERROR, other.to_string()),
    }
}

async fn healthz(State(state): State<Arc<AppState>>) -> Json<serde_json::Value> {
    let n = state.sessions.lock().unwrap().len();
    Json(serde_json::json!({ "status": "ok", "sessions": n }))
}

#[derive(Debug, Deserialize)]
pub struct UploadParams {
    pub superpixels: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionCreated {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub superpixel_count: usize,
    /// Pixels on superpixel borders, run-length encoded.
    pub boundaries: Vec<Run>,
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    Query(params): Query<UploadParams>,
    body: Bytes,
) -> Result<Json<SessionCreated>, ApiError> {
    let target = params.superpixels.unwrap_or(state.config.superpixels);
    let prepared = tokio::task::spawn_blocking(move || {
        let image = decode_image(&body)?;
        PreparedImage::new(image, target)
    })
    .await
    .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
    .map_err(classify)?;

    let sp = prepared.superpixels();
    let reply = SessionCreated {
        id: format!("s{}", state.next_id.fetch_add(1, Ordering::Relaxed)),
        width: sp.width(),
        height: sp.height(),
        superpixel_count: sp.count(),
        boundaries: sp.boundary_mask().to_rle(),
    };
    state
        .sessions
        .lock()
        .unwrap()
        .insert(reply.id.clone(), Arc::new(Session::new(prepared)));
    Ok(Json(reply))
}

/// An annotation plus optional overrides of the service defaults.
#[derive(Debug, Serialize, Deserialize)]
pub struct SegmentRequest {
    #[serde(flatten)]
    pub annotation: Annotation,
    #[serde(default)]
    pub sigma: Option<SigmaStrategy>,
    #[serde(default)]
    pub dynamics: Option<Dynamics>,
    #[serde(default)]
    pub margin: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SegmentReply {
    pub width: u32,
    pub height: u32,
    pub rle: Vec<Run>,
    pub diagnostics: Diagnostics,
    /// Whether this request reused the session's affinity for its sigma strategy.
    pub cache_hit: bool,
    pub cache_hits: u64,
    pub timing_ms: f64,
}

async fn segment_session(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<SegmentReply>, ApiError> {
    let session = state.session(&id).ok_or_else(|| not_found(&id))?;
    let request: SegmentRequest = serde_json::from_slice(&body).map_err(unprocessable)?;
    request.annotation.validate().map_err(classify)?;
    let sigma = request.sigma.unwrap_or_else(|| state.config.sigma.clone());
    if matches!(sigma, SigmaStrategy::Best { .. }) {
        return Err(unprocessable(
            "the best-sigma sweep needs ground truth and is not served",
        ));
    }
    sigma.validate().map_err(classify)?;
    let mut extraction = state.config.extraction;
    if let Some(d) = request.dynamics {
        extraction.dynamics = d;
    }
    if let Some(m) = request.margin {
        extraction.margin = m;
    }
    let guard = session.try_begin().ok_or_else(|| {
        ApiError(
            StatusCode::CONFLICT,
            format!("session `{id}` is already segmenting"),
        )
    })?;

    let reply = tokio::task::spawn_blocking(move || {
        let _guard = guard;
        let start = Instant::now();
        let (affinity, cache_hit) = session.affinity(&sigma)?;
        let seg = segment_prepared(
            &session.prepared,
            &affinity,
            &sigma,
            &request.annotation,
            &extraction,
        )?;
        let reply = SegmentReply {
            width: seg.mask.width(),
            height: seg.mask.height(),
            rle: seg.mask.to_rle(),
            diagnostics: seg.diagnostics,
            cache_hit,
            cache_hits: session.cache_hits(),
            timing_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        *session.last_mask.lock().unwrap() = Some(seg.mask);
        Ok::<_, Error>(reply)
    })
    .await
    .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
    .map_err(classify)?;
    Ok(Json(reply))
}

async fn mask_png(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let session = state.session(&id).ok_or_else(|| not_found(&id))?;
    let mask = session.last_mask.lock().unwrap().clone();
    let mask = mask.ok_or_else(|| {
        ApiError(
            StatusCode::NOT_FOUND,
            format!("session `{id}` has no mask yet"),
        )
    })?;
    let png = mask.to_png_bytes().map_err(classify)?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

async fn delete_session(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<StatusCode, ApiError> {
    match state.sessions.lock().unwrap().remove(&id) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(not_found(&id)),
    }
}

pub async fn serve(addr: std::net::SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(config))).await
}
