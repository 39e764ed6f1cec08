//! HTTP service over a directory of models.
//!
//! | method | path | body | result |
//! |---|---|---|---|
//! | GET | `/models` | | `[{"id", "name"}]`, ids in lexicographic order |
//! | GET | `/models/{id}/schema` | | [`ModelSchema`] |
//! | POST | `/models/{id}/query` | [`QueryRequest`] | [`QueryResponse`] |
//! | POST | `/models/{id}/bounds` | [`BoundRequest`] | 202 with a [`JobView`] |
//! | GET | `/jobs/{job}` | | [`JobView`] |
//! | DELETE | `/jobs/{job}` | | [`JobView`] of the cancelled job |
//!
//! Errors are `{"error": {"code", "message"}}` with 404 for unknown ids, 422
//! for invalid requests, 409 for probability-zero evidence (and for
//! cancelling a finished job), 413 when a request exceeds a cap, and 429 when
//! a model already has its maximum of running bound jobs.

pub mod api;
mod error;
pub mod jobs;
pub mod manifest;
mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use intervene_core::{
    bound_interventions_with, check_bound_request, Limits, SearchOptions, TargetRef,
};
use serde::de::DeserializeOwned;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};
use tower_http::services::ServeDir;

pub use api::{
    bound_response, render_bound, run_query, BoundRequest, BoundResponse, ModelSchema,
    ModelSummary, QueryRequest, QueryResponse, VariableSchema,
};
pub use error::{status_for, ApiError, ErrorBody};
pub use jobs::{JobRegistry, JobStatus, JobView, Progress};
pub use manifest::Manifest;
pub use store::{LoadedModel, ModelStore};

pub const DEFAULT_PORT: u16 = 8642;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub model_dir: PathBuf,
    /// Served under `/` for paths no endpoint claims.
    pub static_dir: Option<PathBuf>,
    pub max_jobs_per_model: usize,
    pub limits: Limits,
    /// Allowed CORS origin; any origin when `None`.
    pub cors_origin: Option<String>,
}

impl ServiceConfig {
    pub fn new(model_dir: impl Into<PathBuf>) -> Self {
        Self {
            model_dir: model_dir.into(),
            static_dir: None,
            max_jobs_per_model: 1,
            limits: Limits::from_env(),
            cors_origin: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

#[derive(Debug)]
struct Inner {
    store: ModelStore,
    jobs: JobRegistry,
    limits: Limits,
}

impl AppState {
    pub fn new(config: &ServiceConfig) -> Self {
        Self {
            inner: Arc::new(Inner {
                store: ModelStore::new(&config.model_dir),
                jobs: JobRegistry::new(config.max_jobs_per_model),
                limits: config.limits,
            }),
        }
    }

    pub fn store(&self) -> &ModelStore {
        &self.inner.store
    }

    pub fn jobs(&self) -> &JobRegistry {
        &self.inner.jobs
    }
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(e.to_string()))
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

async fn list_models(State(state): State<AppState>) -> Json<Vec<ModelSummary>> {
    let models = state
        .store()
        .ids()
        .into_iter()
        .map(|id| {
            let name = match state.store().get(&id) {
                Ok(m) => m.network.name().to_string(),
                Err(e) => {
                    tracing::warn!(model = %id, error = %e.body.message, "model does not load");
                    id.clone()
                }
            };
            ModelSummary { id, name }
        })
        .collect();
    Json(models)
}

async fn schema(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<ModelSchema>, ApiError> {
    let m = state.store().get(&id)?;
    Ok(Json(ModelSchema::build(&m.id, &m.network, &m.manifest)))
}

async fn query(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<QueryResponse>, ApiError> {
    let m = state.store().get(&id)?;
    let req: QueryRequest = parse_body(&body)?;
    let response = blocking(move || {
        run_query(&m.network, &m.manifest.risk_table(), &req).map_err(ApiError::from)
    })
    .await?;
    Ok(Json(response))
}

async fn start_bounds(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let m = state.store().get(&id)?;
    let req: BoundRequest = parse_body(&body)?;
    let target: TargetRef = req
        .target
        .or_else(|| m.manifest.default_target.clone())
        .ok_or_else(|| {
            ApiError::bad_request("no target given and the model has no default target")
        })?;
    let space = req
        .space
        .or_else(|| m.manifest.default_space.clone())
        .ok_or_else(|| {
            ApiError::bad_request("no space given and the model has no default space")
        })?;
    let limits = state.inner.limits;
    let total = check_bound_request(
        &m.network,
        &target.variable,
        &target.state,
        &req.evidence,
        &space,
        &limits,
    )?;
    let job = state.jobs().start(&id, total).ok_or_else(|| {
        ApiError::new(
            StatusCode::TOO_MANY_REQUESTS,
            "job-limit",
            format!("model `{id}` already has its maximum of running bound jobs"),
        )
    })?;
    tracing::info!(job = %job.id(), model = %id, policies = total, "bound job started");
    let worker = job.clone();
    tokio::task::spawn_blocking(move || {
        let opts = SearchOptions {
            limits,
            control: Some(&worker.control),
            ..SearchOptions::default()
        };
        let result = bound_interventions_with(
            &m.network,
            &target.variable,
            &target.state,
            &req.evidence,
            &space,
            req.direction,
            &opts,
        )
        .map(|r| bound_response(&m.network, &target, r))
        .map_err(|e| ApiError::from(e).body);
        worker.finish(result);
        tracing::info!(job = %worker.id(), status = ?worker.view().status, "bound job finished");
    });
    let location = HeaderValue::from_str(&format!("/jobs/{}", job.id())).expect("ascii");
    Ok((
        StatusCode::ACCEPTED,
        [(header::LOCATION, location)],
        Json(job.view()),
    )
        .into_response())
}

async fn job_status(
    State(state): State<AppState>,
    Path(job): Path<String>,
) -> Result<Json<JobView>, ApiError> {
    let job = state
        .jobs()
        .get(&job)
        .ok_or_else(|| ApiError::not_found("job", &job))?;
    Ok(Json(job.view()))
}

async fn cancel_job(
    State(state): State<AppState>,
    Path(job): Path<String>,
) -> Result<Json<JobView>, ApiError> {
    let found = state
        .jobs()
        .get(&job)
        .ok_or_else(|| ApiError::not_found("job", &job))?;
    if found.cancel() {
        Ok(Json(found.view()))
    } else {
        Err(ApiError::new(
            StatusCode::CONFLICT,
            "job-finished",
            format!("job `{job}` has already finished"),
        ))
    }
}

pub fn router(config: &ServiceConfig) -> Router {
    let cors = CorsLayer::new().allow_methods(Any).allow_headers(Any);
    let cors = match config.cors_origin.as_deref().map(HeaderValue::from_str) {
        Some(Ok(origin)) => cors.allow_origin(AllowOrigin::exact(origin)),
        _ => cors.allow_origin(Any),
    };
    let app = Router::new()
        .route("/models", get(list_models))
        .route("/models/{id}/schema", get(schema))
        .route("/models/{id}/query", post(query))
        .route("/models/{id}/bounds", post(start_bounds))
        .route("/jobs/{job}", get(job_status).delete(cancel_job))
        .with_state(AppState::new(config));
    let app = match &config.static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    };
    app.layer(cors)
}

/// Binds `addr` and serves until the process stops.
pub async fn serve(config: ServiceConfig, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, models = %config.model_dir.display(), "serving");
    axum::serve(listener, router(&config)).await
}
