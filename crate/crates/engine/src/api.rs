//! HTTP/JSON API: sessions, intentions, dashboards and catalog registration.

use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use iolap::iql::{parse_statement, render_statement};
use iolap::{SessionManager, SubmitError};
use serde::Deserialize;
use serde_json::{json, Value};

#[derive(Clone)]
pub struct AppState {
    pub sessions: Arc<SessionManager>,
}

#[derive(Deserialize)]
pub struct TextBody {
    pub text: String,
}

struct ApiError(StatusCode, Value);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

impl From<SubmitError> for ApiError {
    fn from(e: SubmitError) -> Self {
        let status = match e.stage.as_str() {
            "session" => StatusCode::NOT_FOUND,
            "execute" => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError(status, e.to_json())
    }
}

fn internal(message: String) -> ApiError {
    ApiError(StatusCode::INTERNAL_SERVER_ERROR, json!({"stage": "internal", "message": message}))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", delete(close_session))
        .route("/sessions/{id}/intentions", post(submit))
        .route("/sessions/{id}/dashboard", get(dashboard))
        .route("/catalog", get(catalog))
        .route("/catalog/{kind}", post(register))
        .route("/render", post(render))
        .with_state(state)
}

async fn create_session(State(s): State<AppState>) -> (StatusCode, Json<Value>) {
    let id = s.sessions.create();
    (StatusCode::CREATED, Json(json!({"id": id})))
}

async fn close_session(State(s): State<AppState>, Path(id): Path<u64>) -> StatusCode {
    if s.sessions.close(id) {
        StatusCode::NO_CONTENT
    } else {
        StatusCode::NOT_FOUND
    }
}

async fn submit(
    State(s): State<AppState>,
    Path(id): Path<u64>,
    Json(body): Json<TextBody>,
) -> Result<Json<Value>, ApiError> {
    let sessions = s.sessions.clone();
    let doc = tokio::task::spawn_blocking(move || sessions.submit(id, &body.text))
        .await
        .map_err(|e| internal(e.to_string()))??;
    Ok(Json(doc))
}

async fn dashboard(State(s): State<AppState>, Path(id): Path<u64>) -> Result<Json<Value>, ApiError> {
    Ok(Json(s.sessions.dashboard(id)?))
}

async fn catalog(State(s): State<AppState>) -> Json<Value> {
    Json(s.sessions.catalog.read().to_json())
}

async fn register(
    State(s): State<AppState>,
    Path(kind): Path<String>,
    Json(payload): Json<Value>,
) -> Result<(StatusCode, Json<Value>), ApiError> {
    let catalog = s.sessions.catalog.clone();
    let k = kind.clone();
    let p = payload.clone();
    tokio::task::spawn_blocking(move || catalog.register(&k, &p))
        .await
        .map_err(|e| internal(e.to_string()))?
        .map_err(|e| ApiError(StatusCode::BAD_REQUEST, json!({"stage": "catalog", "message": e.to_string()})))?;
    Ok((StatusCode::CREATED, Json(json!({"kind": kind, "name": payload["name"]}))))
}

/// Parses a statement and returns its canonical text.
async fn render(Json(body): Json<TextBody>) -> Result<Json<Value>, ApiError> {
    let stmt = parse_statement(&body.text).map_err(|e| ApiError::from(SubmitError::from(e)))?;
    Ok(Json(json!({"canonical": render_statement(&stmt)})))
}
