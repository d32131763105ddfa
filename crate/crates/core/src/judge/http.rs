use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use tower_http::services::{ServeDir, ServeFile};

use super::service::{Choice, JudgeService, ServiceError};
use crate::error::{Error, Result};

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match self {
            ServiceError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ServiceError::OutOfOrder { .. } | ServiceError::Finished(_) => StatusCode::CONFLICT,
            ServiceError::Store(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(serde_json::json!({ "error": self.to_string() }))).into_response()
    }
}

#[derive(Deserialize)]
struct TrialQuery {
    session: String,
}

#[derive(Deserialize)]
struct JudgmentBody {
    session: String,
    trial_id: u32,
    choice: Choice,
}

type Shared = State<Arc<JudgeService>>;

async fn create_session(State(svc): Shared) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(svc.create_session()?))
}

async fn next_trial(State(svc): Shared, Query(q): Query<TrialQuery>) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(svc.next_trial(&q.session)?))
}

async fn submit(State(svc): Shared, Json(body): Json<JudgmentBody>) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(svc.submit(&body.session, body.trial_id, body.choice)?))
}

async fn results(State(svc): Shared) -> impl IntoResponse {
    Json(svc.results())
}

const PLACEHOLDER: &str = "<!doctype html><title>judge</title><p>No client bundle configured. \
API: POST /api/session, GET /api/trial?session=ID, POST /api/judgment, GET /api/results.</p>";

/// API routes plus static hosting of `static_dir` at `/` (with `index.html`
/// as the fallback for unknown paths).
pub fn router(service: Arc<JudgeService>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/session", post(create_session))
        .route("/api/trial", get(next_trial))
        .route("/api/judgment", post(submit))
        .route("/api/results", get(results))
        .with_state(service);
    match static_dir {
        Some(dir) => {
            let index = dir.join("index.html");
            api.fallback_service(ServeDir::new(dir).fallback(ServeFile::new(index)))
        }
        None => api.route("/", get(|| async { Html(PLACEHOLDER) })),
    }
}

pub async fn serve(service: Arc<JudgeService>, addr: SocketAddr, static_dir: Option<PathBuf>) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("judge service listening on {}", listener.local_addr()?);
    axum::serve(listener, router(service, static_dir))
        .await
        .map_err(|e| Error::Judge(e.to_string()))
}
