use std::future::Future;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use crate::collector::{Collector, ServiceError, SubmitRequest};

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::UnknownRater(_) | ServiceError::UnknownSession | ServiceError::IndexOutOfRange { .. } => {
                StatusCode::NOT_FOUND
            }
            ServiceError::SessionExists(_) | ServiceError::Finished => StatusCode::CONFLICT,
            ServiceError::Expired => StatusCode::GONE,
            ServiceError::Invalid(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Unauthorized => StatusCode::UNAUTHORIZED,
            ServiceError::Journal(e) => {
                tracing::error!(error = %e, "journal write failed");
                StatusCode::INTERNAL_SERVER_ERROR
            }
        };
        let mut body = json!({ "error": self.to_string() });
        match self {
            ServiceError::Expired => body["state"] = json!("expired"),
            ServiceError::Finished => body["state"] = json!("finished"),
            _ => {}
        }
        (status, Json(body)).into_response()
    }
}

#[derive(Deserialize)]
struct CreateSession {
    rater_id: String,
}

async fn create_session(
    State(c): State<Arc<Collector>>,
    Json(req): Json<CreateSession>,
) -> Result<impl IntoResponse, ServiceError> {
    Ok((StatusCode::CREATED, Json(c.create_session(&req.rater_id)?)))
}

async fn get_task(
    State(c): State<Arc<Collector>>,
    Path((token, index)): Path<(String, usize)>,
) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(c.task(&token, index)?))
}

async fn put_task(
    State(c): State<Arc<Collector>>,
    Path((token, index)): Path<(String, usize)>,
    Json(req): Json<SubmitRequest>,
) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(c.submit(&token, index, req)?))
}

async fn status(State(c): State<Arc<Collector>>, Path(token): Path<String>) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(c.status(&token)?))
}

async fn export(State(c): State<Arc<Collector>>, headers: HeaderMap) -> Result<impl IntoResponse, ServiceError> {
    let bearer = headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "));
    c.authorize(bearer)?;
    let records = c.export();
    let mut body = Vec::new();
    blindpe_core::annotation::write_jsonl(&mut body, &records).expect("writing to a Vec cannot fail");
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], body))
}

pub fn router(collector: Arc<Collector>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{token}/tasks/{index}", get(get_task).put(put_task))
        .route("/sessions/{token}/status", get(status))
        .route("/export", get(export))
        .with_state(collector)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    collector: Arc<Collector>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(collector))
        .with_graceful_shutdown(shutdown)
        .await
}
