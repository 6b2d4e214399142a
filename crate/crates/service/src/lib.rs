//! HTTP/JSON front end: stored instances, what-if scoring of manual cuts and
//! background solve jobs.
//!
//! | route | |
//! |---|---|
//! | `POST /api/instances` | instance JSON, or `{"source": "karate" \| "tree", ..}` |
//! | `GET /api/instances` | summaries |
//! | `GET /api/instances/{id}` | full instance |
//! | `DELETE /api/instances/{id}` | |
//! | `POST /api/instances/{id}/whatif` | `{"isolate": [ids]}` |
//! | `POST /api/instances/{id}/solve` | solve parameters, returns a job |
//! | `GET /api/jobs/{id}` | job state and result |
//!
//! Errors are `{"error": .., "detail": ..}`.

mod error;
pub mod jobs;
pub mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use cyberseg_core::instances::{generate_full_ary_tree, load_karate, sample_attacked, InstanceFile, Rounding};
use cyberseg_core::{evaluate_cut, Algorithm, AttackSet, DeviceId, Instance, ObjectiveMode, SolveRequest};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

pub use error::ApiError;
pub use jobs::{JobState, Jobs, SolveJob};
pub use store::{InstanceSummary, Store, StoredInstance};

#[derive(Debug, Clone)]
pub struct AppState {
    pub store: Arc<Store>,
    pub jobs: Arc<Jobs>,
}

impl AppState {
    /// Opens the instance store in `dir` and the job journal in `dir/jobs`.
    pub fn open(dir: impl Into<PathBuf>) -> std::io::Result<AppState> {
        let dir = dir.into();
        let store = Store::open(&dir)?;
        let jobs = Jobs::open(dir.join("jobs"))?;
        Ok(AppState { store: Arc::new(store), jobs: Arc::new(jobs) })
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/instances", post(create_instance).get(list_instances))
        .route("/api/instances/{id}", get(get_instance).delete(delete_instance))
        .route("/api/instances/{id}/whatif", post(whatif))
        .route("/api/instances/{id}/solve", post(submit_solve))
        .route("/api/jobs/{id}", get(get_job))
        .fallback(|| async { ApiError::not_found("no such route") })
        .with_state(state)
}

/// Serves until the process is stopped.
pub async fn serve(addr: SocketAddr, data_dir: PathBuf) -> std::io::Result<()> {
    let state = AppState::open(&data_dir)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{} (data in {})", listener.local_addr()?, data_dir.display());
    axum::serve(listener, router(state)).await
}

/// Blocking wrapper around [`serve`] with its own runtime.
pub fn serve_blocking(addr: SocketAddr, data_dir: PathBuf) -> std::io::Result<()> {
    tokio::runtime::Builder::new_multi_thread().enable_all().build()?.block_on(serve(addr, data_dir))
}

fn parse_body<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

fn lookup(state: &AppState, id: &str) -> Result<StoredInstance, ApiError> {
    state.store.get(id).ok_or_else(|| ApiError::not_found(format!("unknown instance {id}")))
}

/// Generated-instance shortcut for `POST /api/instances`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Generated {
    source: String,
    name: Option<String>,
    n: Option<usize>,
    branching: Option<usize>,
    #[serde(default)]
    p: f64,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    rounding: Rounding,
    attacked: Option<Vec<DeviceId>>,
    budget: Option<usize>,
}

impl Generated {
    fn build(self) -> Result<(Instance, String), ApiError> {
        let (graph, default_name) = match self.source.as_str() {
            "karate" => (load_karate(), "karate".to_string()),
            "tree" => {
                let (Some(n), Some(r)) = (self.n, self.branching) else {
                    return Err(ApiError::bad_request("source \"tree\" needs n and branching"));
                };
                (generate_full_ary_tree(n, r)?, format!("tree-{n}-{r}"))
            }
            other => return Err(ApiError::bad_request(format!("unknown source {other:?} (expected karate or tree)"))),
        };
        let attacked = match self.attacked {
            Some(ids) => AttackSet::new(ids),
            None => sample_attacked(&graph, self.p, self.seed, self.rounding)?,
        };
        let instance = Instance::new(graph, attacked, self.budget)?;
        Ok((instance, self.name.unwrap_or(default_name)))
    }
}

async fn create_instance(State(state): State<AppState>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let value: Value = parse_body(&body)?;
    let (instance, name) = if value.get("source").is_some() {
        serde_json::from_value::<Generated>(value)
            .map_err(|e| ApiError::bad_request(e.to_string()))?
            .build()?
    } else {
        let name = value.get("name").and_then(Value::as_str).unwrap_or("instance").to_string();
        let file: InstanceFile = serde_json::from_value(value).map_err(|e| ApiError::bad_request(e.to_string()))?;
        (Instance::try_from(file)?, name)
    };
    let stored = state.store.insert(instance, name)?;
    Ok((StatusCode::CREATED, Json(stored.summary())))
}

async fn list_instances(State(state): State<AppState>) -> Json<Vec<InstanceSummary>> {
    Json(state.store.list())
}

async fn get_instance(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let stored = lookup(&state, &id)?;
    Ok(Json(json!({
        "id": stored.id,
        "name": stored.meta.name,
        "created_at": stored.meta.created_at,
        "instance": InstanceFile::from(&*stored.instance),
    })))
}

async fn delete_instance(State(state): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    if state.store.remove(&id)? {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::not_found(format!("unknown instance {id}")))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WhatIf {
    isolate: Vec<DeviceId>,
}

async fn whatif(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let stored = lookup(&state, &id)?;
    let req: WhatIf = parse_body(&body)?;
    let inst = &stored.instance;
    Ok(Json(evaluate_cut(&inst.graph, &inst.attacked, &req.isolate)?))
}

/// Body of `POST /api/instances/{id}/solve`. `k` defaults to the instance
/// budget; `timeout` is in seconds.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveParams {
    #[serde(default)]
    algo: Algorithm,
    k: Option<usize>,
    x: Option<usize>,
    #[serde(default)]
    mode: ObjectiveMode,
    timeout: Option<u64>,
    filter: Option<bool>,
    jobs: Option<usize>,
}

async fn submit_solve(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let stored = lookup(&state, &id)?;
    let params: SolveParams = if body.iter().all(u8::is_ascii_whitespace) { parse_body(b"{}")? } else { parse_body(&body)? };
    let defaults = SolveRequest::default();
    let request = SolveRequest {
        algo: params.algo,
        k: params
            .k
            .or(stored.instance.budget)
            .ok_or_else(|| ApiError::bad_request("k is required when the instance has no budget"))?,
        x: params.x.unwrap_or(defaults.x),
        mode: params.mode,
        timeout_secs: params.timeout.unwrap_or(defaults.timeout_secs),
        filter: params.filter.unwrap_or(defaults.filter),
        jobs: params.jobs,
    };
    request.validate()?;
    let job = state
        .jobs
        .enqueue(&id, request)
        .map_err(|existing| ApiError::conflict(format!("identical job {existing} is still running")))?;
    state.jobs.spawn(job.id.clone(), Arc::clone(&stored.instance));
    Ok((StatusCode::ACCEPTED, Json(job)))
}

async fn get_job(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<SolveJob>, ApiError> {
    state.jobs.get(&id).map(Json).ok_or_else(|| ApiError::not_found(format!("unknown job {id}")))
}
