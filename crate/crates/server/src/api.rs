//! JSON API.
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/graphs` | ingest N-Triples `{name, ntriples}` |
//! | GET | `/graphs` | |
//! | POST | `/indices` | `{graph, type_iri, spec_source, shapes_graph?, depth?}` |
//! | GET | `/indices`, `/indices/{id}` | |
//! | POST | `/pairs` | `{source_index, target_index}` |
//! | GET | `/pairs`, `/pairs/{id}` | |
//! | GET, PUT | `/pairs/{id}/config` | |
//! | POST | `/pairs/{id}/runs` | start a detection run, returns a job |
//! | GET | `/pairs/{id}/results` | `?accepted=&offset=&limit=` |
//! | GET | `/pairs/{id}/labels/next` | `?n=` labelling queue |
//! | GET, POST | `/pairs/{id}/labels` | `{source_id, target_id, is_duplicate}` |
//! | GET | `/pairs/{id}/metrics` | |
//! | POST | `/pairs/{id}/strategies` | `{steps, prefs?}`, returns a job |
//! | GET | `/jobs/{id}`, `/jobs/{id}/log` | job status and strategy audit log |
//!
//! Errors are `{"error": ...}` with 400 for malformed bodies and N-Triples
//! (plus `line`), 404 for unknown ids, 409 for conflicts with a running
//! strategy, 422 for invalid configurations or options and 500 with an opaque
//! `reference` otherwise.

use std::net::SocketAddr;
use std::sync::{Arc, RwLock, RwLockReadGuard, RwLockWriteGuard};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use kgdedup::learn::{
    execute_strategy_observed, validate_strategy, LabelRecord, LearnError, MetricPrefs, SearchContext, StrategyStep,
};
use kgdedup::workspace::{JobKind, JobRecord, SpecSource, StrategyStatus, Workspace, WorkspaceError};
use kgdedup::DDConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Clone)]
pub struct AppState {
    ws: Arc<RwLock<Workspace>>,
}

impl AppState {
    pub fn new(ws: Workspace) -> Self {
        Self {
            ws: Arc::new(RwLock::new(ws)),
        }
    }

    pub fn workspace(&self) -> &Arc<RwLock<Workspace>> {
        &self.ws
    }

    fn read(&self) -> RwLockReadGuard<'_, Workspace> {
        self.ws.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write(&self) -> RwLockWriteGuard<'_, Workspace> {
        self.ws.write().unwrap_or_else(|e| e.into_inner())
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, msg: impl ToString) -> Self {
        Self {
            status,
            body: json!({ "error": msg.to_string() }),
        }
    }

    fn internal(err: impl std::fmt::Display) -> Self {
        let reference = uuid::Uuid::new_v4().to_string();
        tracing::error!(%reference, error = %err, "internal error");
        Self {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            body: json!({ "error": "internal error", "reference": reference }),
        }
    }
}

impl From<WorkspaceError> for ApiError {
    fn from(e: WorkspaceError) -> Self {
        match e {
            WorkspaceError::NotFound { .. } => ApiError::new(StatusCode::NOT_FOUND, e),
            WorkspaceError::Conflict(_) => ApiError::new(StatusCode::CONFLICT, e),
            WorkspaceError::Parse(ref p) => ApiError {
                status: StatusCode::BAD_REQUEST,
                body: json!({ "error": e.to_string(), "line": p.line }),
            },
            WorkspaceError::Invalid(_) | WorkspaceError::Spec(_) | WorkspaceError::Dd(_) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e)
            }
            WorkspaceError::Learn(LearnError::Store(_)) | WorkspaceError::Store(_) => ApiError::internal(e),
            WorkspaceError::Learn(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Malformed JSON is a 400; well-formed JSON with invalid content a 422.
fn parse_body<T: DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| {
        let status = if e.is_data() {
            StatusCode::UNPROCESSABLE_ENTITY
        } else {
            StatusCode::BAD_REQUEST
        };
        ApiError::new(status, e)
    })
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/graphs", post(add_graph).get(list_graphs))
        .route("/indices", post(create_index).get(list_indices))
        .route("/indices/{id}", get(get_index))
        .route("/pairs", post(create_pair).get(list_pairs))
        .route("/pairs/{id}", get(get_pair))
        .route("/pairs/{id}/config", get(get_config).put(put_config))
        .route("/pairs/{id}/runs", post(start_run))
        .route("/pairs/{id}/results", get(get_results))
        .route("/pairs/{id}/labels/next", get(next_labels))
        .route("/pairs/{id}/labels", get(list_labels).post(post_label))
        .route("/pairs/{id}/metrics", get(get_metrics))
        .route("/pairs/{id}/strategies", post(start_strategy))
        .route("/jobs/{id}", get(get_job))
        .route("/jobs/{id}/log", get(get_job_log))
        .with_state(state)
}

/// Serves the API on `addr` until the process is stopped.
pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state)).await
}

#[derive(Deserialize)]
struct GraphRequest {
    name: String,
    ntriples: String,
}

async fn add_graph(State(st): State<AppState>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let req: GraphRequest = parse_body(&body)?;
    let info = st.write().add_graph(&req.name, &req.ntriples)?;
    Ok((StatusCode::CREATED, Json(info)))
}

async fn list_graphs(State(st): State<AppState>) -> impl IntoResponse {
    Json(st.read().graphs().cloned().collect::<Vec<_>>())
}

#[derive(Deserialize)]
struct IndexRequest {
    graph: String,
    type_iri: String,
    spec_source: SpecSource,
    shapes_graph: Option<String>,
    #[serde(default = "default_depth")]
    depth: usize,
}

fn default_depth() -> usize {
    1
}

async fn create_index(State(st): State<AppState>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let req: IndexRequest = parse_body(&body)?;
    let info = st.write().create_index(
        &req.graph,
        &req.type_iri,
        req.spec_source,
        req.shapes_graph.as_deref(),
        req.depth,
    )?;
    Ok((StatusCode::CREATED, Json(info)))
}

async fn list_indices(State(st): State<AppState>) -> impl IntoResponse {
    Json(st.read().indices().cloned().collect::<Vec<_>>())
}

async fn get_index(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(st.read().index(&id)?.0.clone()))
}

#[derive(Deserialize)]
struct PairRequest {
    source_index: String,
    target_index: String,
}

async fn create_pair(State(st): State<AppState>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let req: PairRequest = parse_body(&body)?;
    let info = st.write().create_pair(&req.source_index, &req.target_index)?;
    Ok((StatusCode::CREATED, Json(info)))
}

async fn list_pairs(State(st): State<AppState>) -> impl IntoResponse {
    Json(st.read().pairs().cloned().collect::<Vec<_>>())
}

async fn get_pair(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(st.read().pair(&id)?.clone()))
}

#[derive(Serialize)]
struct ConfigResponse<'a> {
    version: u64,
    config: &'a DDConfig,
}

async fn get_config(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let ws = st.read();
    let info = ws.pair(&id)?;
    Ok(Json(json!(ConfigResponse {
        version: info.version,
        config: &info.config,
    })))
}

async fn put_config(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<impl IntoResponse> {
    st.read().pair(&id)?;
    let config: DDConfig = parse_body(&body)?;
    let info = st.write().set_config(&id, config)?;
    Ok(Json(json!(ConfigResponse {
        version: info.version,
        config: &info.config,
    })))
}

fn accepted_job(job: &JobRecord) -> (StatusCode, Json<JobRecord>) {
    (StatusCode::ACCEPTED, Json(job.clone()))
}

async fn start_run(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let (job, inputs) = {
        let mut ws = st.write();
        let inputs = ws.run_inputs(&id)?;
        (ws.create_job(JobKind::DdRun, &id)?, inputs)
    };
    let job_id = job.id.clone();
    tokio::task::spawn_blocking(move || {
        let outcome = match inputs.run() {
            Ok(results) => {
                let accepted = results.iter().filter(|p| p.accepted).count();
                let summary = json!({ "version": inputs.version, "pairs": results.len(), "accepted": accepted });
                st.write()
                    .store_results(&id, inputs.version, results)
                    .map(|_| summary)
                    .map_err(|e| e.to_string())
            }
            Err(e) => Err(e.to_string()),
        };
        if let Err(e) = st.write().finish_job(&job_id, outcome) {
            tracing::error!(job = %job_id, error = %e, "cannot record job outcome");
        }
    });
    Ok(accepted_job(&job))
}

#[derive(Deserialize)]
struct ResultsQuery {
    accepted: Option<bool>,
    #[serde(default)]
    offset: usize,
    limit: Option<usize>,
}

async fn get_results(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ResultsQuery>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(st.read().results(&id, q.accepted, q.offset, q.limit)?))
}

#[derive(Deserialize)]
struct NextQuery {
    #[serde(default = "default_queue")]
    n: usize,
}

fn default_queue() -> usize {
    10
}

async fn next_labels(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<NextQuery>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(st.read().next_labels(&id, q.n)?))
}

#[derive(Deserialize)]
struct LabelRequest {
    source_id: String,
    target_id: String,
    is_duplicate: bool,
}

async fn post_label(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<impl IntoResponse> {
    st.read().pair(&id)?;
    let req: LabelRequest = parse_body(&body)?;
    let rec = st
        .write()
        .record_label(&id, &req.source_id, &req.target_id, req.is_duplicate)?;
    Ok((StatusCode::CREATED, Json(rec)))
}

async fn list_labels(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(
        st.read().labels(&id)?.iter().cloned().collect::<Vec<LabelRecord>>(),
    ))
}

async fn get_metrics(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(st.read().metrics(&id)?))
}

#[derive(Deserialize)]
struct StrategyRequest {
    steps: Vec<StrategyStep>,
    #[serde(default)]
    prefs: MetricPrefs,
}

async fn start_strategy(
    State(st): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<impl IntoResponse> {
    st.read().pair(&id)?;
    let req: StrategyRequest = parse_body(&body)?;
    validate_strategy(&req.steps).map_err(WorkspaceError::from)?;
    let (job, inputs, labels) = {
        let mut ws = st.write();
        let inputs = ws.run_inputs(&id)?;
        let labels = ws.labels(&id)?.label_set();
        (ws.begin_strategy(&id, req.steps.len())?, inputs, labels)
    };
    let job_id = job.id.clone();
    tokio::task::spawn_blocking(move || {
        let mut ctx = SearchContext::new(&inputs.source, &inputs.target, labels, req.prefs, inputs.options);
        let outcome = execute_strategy_observed(&mut ctx, &inputs.config, &req.steps, |step, of| {
            let status = StrategyStatus::Running {
                job: job_id.clone(),
                step,
                of,
            };
            if let Err(e) = st.write().set_strategy_status(&id, status) {
                tracing::error!(job = %job_id, error = %e, "cannot record strategy progress");
            }
        });
        let finished = finish_strategy(&st, &id, &job_id, ctx.audit(), outcome);
        let result = finished.map_err(|e| e.to_string()).and_then(|r| r);
        if let Err(e) = st.write().finish_job(&job_id, result) {
            tracing::error!(job = %job_id, error = %e, "cannot record job outcome");
        }
    });
    Ok(accepted_job(&job))
}

/// Adopts the strategy outcome, reruns detection with it and summarizes the
/// job. The inner error is a failed step; the outer one a workspace failure.
fn finish_strategy(
    st: &AppState,
    pair: &str,
    job: &str,
    audit: &[kgdedup::learn::AuditEntry],
    outcome: Result<kgdedup::learn::StrategyOutcome, LearnError>,
) -> Result<Result<Value, String>, WorkspaceError> {
    st.write().append_job_log(job, audit)?;
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            st.write().end_strategy(pair, None, Some(e.to_string()))?;
            return Ok(Err(e.to_string()));
        }
    };
    let info = st
        .write()
        .end_strategy(pair, Some(outcome.config.clone()), outcome.error.clone())?;
    let inputs = st.read().run_inputs(pair)?;
    let results = inputs.run()?;
    st.write().store_results(pair, inputs.version, results)?;
    let summary = json!({
        "version": info.version,
        "evaluations": audit.len(),
        "completed_steps": outcome.completed_steps,
        "initial_report": outcome.initial_report,
        "report": outcome.report,
    });
    Ok(match outcome.error {
        Some(e) => Err(e),
        None => Ok(summary),
    })
}

async fn get_job(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(st.read().job(&id)?.clone()))
}

async fn get_job_log(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(st.read().job_log(&id)?))
}
