//! HTTP API under `/v1`. Bodies are JSON.
//!
//! ```text
//! POST   /v1/sessions                      {program, goal?, equation?} -> StateView
//! GET    /v1/sessions                      -> [SessionSummary]
//! GET    /v1/sessions/{id}                 -> StateView
//! DELETE /v1/sessions/{id}
//! GET    /v1/sessions/{id}/suggestions?target=N -> Suggestions
//! POST   /v1/sessions/{id}/steps           {step, expected_version?} -> StateView
//! POST   /v1/sessions/{id}/tactics         {tactic, expected_version?} -> StateView
//! POST   /v1/sessions/{id}/undo            {count?, expected_version?} -> StateView
//! GET    /v1/sessions/{id}/trace           -> trace document
//! PUT    /v1/sessions/{id}/trace           {trace, expected_version?} -> StateView
//! ```
//!
//! Errors are `{code, message}` with status 400 (bad request), 404 (unknown
//! session), 409 (version mismatch) or 422 (rejected step, failed tactic,
//! replay divergence). For rejected steps `code` is the kernel's reason.

use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use lcri_core::kernel::ProofStep;
use lcri_core::trace::Trace;
use serde::{Deserialize, Serialize};

use crate::service::{ServiceError, SessionSummary, StateView, Store, Suggestions, Tactic};

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Conflict { .. } => StatusCode::CONFLICT,
            ServiceError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            ServiceError::Rejected(_) | ServiceError::Tactic(_) | ServiceError::Replay(_) => StatusCode::UNPROCESSABLE_ENTITY,
        };
        let body = ErrorBody {
            code: self.code(),
            message: self.to_string(),
        };
        (status, Json(body)).into_response()
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CreateRequest {
    pub program: String,
    #[serde(default)]
    pub goal: Option<usize>,
    #[serde(default)]
    pub equation: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StepRequest {
    pub step: ProofStep,
    #[serde(default)]
    pub expected_version: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TacticRequest {
    pub tactic: Tactic,
    #[serde(default)]
    pub expected_version: Option<u64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct UndoRequest {
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub expected_version: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ImportRequest {
    pub trace: Trace,
    #[serde(default)]
    pub expected_version: Option<u64>,
}

#[derive(Debug, Deserialize)]
pub struct TargetQuery {
    #[serde(default)]
    pub target: usize,
}

type Shared = State<Arc<Store>>;
type Reply<T> = Result<Json<T>, ServiceError>;

// Tactics and searches are CPU-bound; keep them off the async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static) -> Reply<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Io(e.to_string()))?
        .map(Json)
}

async fn create(State(s): Shared, Json(r): Json<CreateRequest>) -> Result<(StatusCode, Json<StateView>), ServiceError> {
    let v = blocking(move || s.create(&r.program, r.goal, r.equation.as_deref())).await?;
    Ok((StatusCode::CREATED, v))
}

async fn list(State(s): Shared) -> Json<Vec<SessionSummary>> {
    Json(s.list())
}

async fn view(State(s): Shared, Path(id): Path<String>) -> Reply<StateView> {
    s.view(&id).map(Json)
}

async fn delete(State(s): Shared, Path(id): Path<String>) -> Result<StatusCode, ServiceError> {
    s.delete(&id).map(|_| StatusCode::NO_CONTENT)
}

async fn suggestions(State(s): Shared, Path(id): Path<String>, Query(q): Query<TargetQuery>) -> Reply<Suggestions> {
    blocking(move || s.suggestions(&id, q.target)).await
}

async fn step(State(s): Shared, Path(id): Path<String>, Json(r): Json<StepRequest>) -> Reply<StateView> {
    blocking(move || s.apply_step(&id, r.step, r.expected_version)).await
}

async fn tactic(State(s): Shared, Path(id): Path<String>, Json(r): Json<TacticRequest>) -> Reply<StateView> {
    blocking(move || s.apply_tactic(&id, &r.tactic, r.expected_version)).await
}

async fn undo(State(s): Shared, Path(id): Path<String>, body: Option<Json<UndoRequest>>) -> Reply<StateView> {
    let r = body.map(|Json(r)| r).unwrap_or_default();
    blocking(move || s.undo(&id, r.count.unwrap_or(1), r.expected_version)).await
}

async fn export(State(s): Shared, Path(id): Path<String>) -> Reply<Trace> {
    s.export(&id).map(Json)
}

async fn import(State(s): Shared, Path(id): Path<String>, Json(r): Json<ImportRequest>) -> Reply<StateView> {
    blocking(move || s.import(&id, &r.trace, r.expected_version)).await
}

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/v1/sessions", post(create).get(list))
        .route("/v1/sessions/{id}", get(view).delete(delete))
        .route("/v1/sessions/{id}/suggestions", get(suggestions))
        .route("/v1/sessions/{id}/steps", post(step))
        .route("/v1/sessions/{id}/tactics", post(tactic))
        .route("/v1/sessions/{id}/undo", post(undo))
        .route("/v1/sessions/{id}/trace", get(export).put(import))
        .with_state(store)
}
