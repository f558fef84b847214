//! JSON HTTP API over a [`SessionStore`].

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::Deserialize;
use tower_http::services::ServeDir;

use crate::session::{CreateRequest, MeasurementInput, SessionError, SessionStore};

impl IntoResponse for SessionError {
    fn into_response(self) -> Response {
        let status = match &self {
            SessionError::NotFound(_) => StatusCode::NOT_FOUND,
            SessionError::InvalidRequest(_) | SessionError::InvalidConfig { .. } | SessionError::UnknownFormat(_) => {
                StatusCode::BAD_REQUEST
            }
            SessionError::StateConflict(_) | SessionError::Incomplete { .. } => StatusCode::CONFLICT,
            SessionError::Journal(_) | SessionError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(self.body())).into_response()
    }
}

type ApiResult<T> = Result<T, SessionError>;

/// Request bodies that fail to parse become `invalid_request` errors.
struct JsonBody<T>(T);

impl<S, T> axum::extract::FromRequest<S> for JsonBody<T>
where
    T: serde::de::DeserializeOwned,
    S: Send + Sync,
{
    type Rejection = SessionError;

    async fn from_request(req: axum::extract::Request, state: &S) -> Result<Self, Self::Rejection> {
        Json::<T>::from_request(req, state)
            .await
            .map(|Json(v)| JsonBody(v))
            .map_err(|e| SessionError::InvalidRequest(e.body_text()))
    }
}

/// The API under `/api`, plus static files from `assets` for everything else.
pub fn router(store: Arc<SessionStore>, assets: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/sessions", post(create_session).get(list_sessions))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/generations/current/robots/{idx}/measurement", put(record_measurement))
        .route("/api/sessions/{id}/advance", post(advance))
        .route("/api/sessions/{id}/export", get(export))
        .with_state(store);
    match assets {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

async fn create_session(
    State(store): State<Arc<SessionStore>>,
    JsonBody(req): JsonBody<CreateRequest>,
) -> ApiResult<impl IntoResponse> {
    let session = store.create(&req)?;
    Ok((StatusCode::CREATED, Json(session.view())))
}

async fn list_sessions(State(store): State<Arc<SessionStore>>) -> impl IntoResponse {
    Json(store.list())
}

async fn get_session(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(store.get(&id)?.view()))
}

#[derive(Debug, Deserialize)]
struct OverwriteQuery {
    #[serde(default)]
    overwrite: bool,
}

async fn record_measurement(
    State(store): State<Arc<SessionStore>>,
    Path((id, idx)): Path<(String, String)>,
    Query(q): Query<OverwriteQuery>,
    JsonBody(input): JsonBody<MeasurementInput>,
) -> ApiResult<impl IntoResponse> {
    let idx: usize = idx
        .parse()
        .map_err(|_| SessionError::InvalidRequest(format!("robot index `{idx}` is not a nonnegative integer")))?;
    Ok(Json(store.record_measurement(&id, idx, &input, q.overwrite)?.view()))
}

async fn advance(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(store.advance(&id)?.view()))
}

#[derive(Debug, Deserialize)]
struct ExportQuery {
    format: Option<String>,
}

async fn export(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    Query(q): Query<ExportQuery>,
) -> ApiResult<impl IntoResponse> {
    let csv = store.export(&id, q.format.as_deref().unwrap_or("csv"))?;
    let disposition = format!("attachment; filename=\"{id}.csv\"");
    Ok((
        [(header::CONTENT_TYPE, "text/csv; charset=utf-8".to_string()), (header::CONTENT_DISPOSITION, disposition)],
        csv,
    ))
}
