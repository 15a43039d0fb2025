//! HTTP service over an immutable panel.
//!
//! | method | path | body / query | reply |
//! |--------|------|--------------|-------|
//! | GET | `/health` | | `{"status":"ok", ...}` |
//! | GET | `/players` | `gw` | `[PlayerRow]` |
//! | GET | `/forecasts` | `method`, `gw` | `[ForecastRow]` |
//! | POST | `/optimize` | `OptimizeRequest` | `OptimizeResponse` |
//! | POST | `/backtest` | `BacktestRequest` | `202 {"id": n}` |
//! | GET | `/reports/{id}` | | `JobStatus` |
//!
//! Errors are `{"error": kind, "message": ..., "field": ...}`; an infeasible
//! optimize answers 422 with `{"error": "infeasible", "resource", "message"}`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use fpl_core::api::{Engine, OptimizeRequest};
use fpl_core::Error;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::Semaphore;

pub struct AppState {
    pub engine: Engine,
    jobs: Mutex<BTreeMap<u64, JobStatus>>,
    next_id: AtomicU64,
    workers: Arc<Semaphore>,
    reports_dir: PathBuf,
}

impl AppState {
    /// Backtest bundles go to `<output_dir>/reports/<id>`.
    pub fn new(engine: Engine, workers: usize) -> Self {
        let reports_dir = engine.config().output_dir.join("reports");
        AppState {
            engine,
            jobs: Mutex::new(BTreeMap::new()),
            next_id: AtomicU64::new(1),
            workers: Arc::new(Semaphore::new(workers.max(1))),
            reports_dir,
        }
    }
}

/// Body of `POST /backtest`. Every field is a run-config key (see
/// `docs/config.md`) applied over the server's configuration.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(transparent)]
pub struct BacktestRequest(pub BTreeMap<String, Value>);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JobStatus {
    pub id: u64,
    /// `queued`, `running`, `done` or `failed`.
    pub status: String,
    pub bundle: Option<String>,
    pub error: Option<String>,
    /// `summary.json` once done.
    pub summary: Option<Value>,
}

struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn bad(kind: &str, field: Option<&str>, message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            body: json!({"error": kind, "message": message.into(), "field": field}),
        }
    }
}

/// Names the request field an error message refers to, if it starts with one.
fn field_of(message: &str) -> Option<String> {
    let head = message.split(':').next()?;
    let field = head.split('/').next()?;
    (!field.is_empty() && field.chars().all(|c| c.is_ascii_lowercase() || c == '_')).then(|| field.to_string())
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::Infeasible(r) => ApiError {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                body: json!({"error": "infeasible", "resource": r.resource, "message": r.message}),
            },
            Error::InvalidArgument(ref m) => {
                let field = field_of(m);
                ApiError::bad(e.kind(), field.as_deref(), e.to_string())
            }
            Error::UnknownPlayer(_) | Error::Config(_) => ApiError::bad(e.kind(), None, e.to_string()),
            other => ApiError {
                status: StatusCode::INTERNAL_SERVER_ERROR,
                body: json!({"error": other.kind(), "message": other.to_string(), "field": null}),
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type Shared = Arc<AppState>;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/players", get(players))
        .route("/forecasts", get(forecasts))
        .route("/optimize", post(optimize))
        .route("/backtest", post(backtest))
        .route("/reports/{id}", get(report))
        .with_state(state)
}

async fn health(State(s): State<Shared>) -> Json<Value> {
    let p = s.engine.panel();
    Json(json!({
        "status": "ok",
        "players": p.players().count(),
        "season_length": p.season_length(),
        "split_week": p.split_week(),
    }))
}

fn query_gw(q: &BTreeMap<String, String>, default: u8) -> Result<u8, ApiError> {
    match q.get("gw") {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| ApiError::bad("invalid_argument", Some("gw"), format!("gw: `{v}` is not a gameweek"))),
    }
}

async fn players(State(s): State<Shared>, Query(q): Query<BTreeMap<String, String>>) -> Result<Response, ApiError> {
    let gw = query_gw(&q, s.engine.config().target_gw)?;
    Ok(Json(s.engine.players(gw)?).into_response())
}

async fn forecasts(State(s): State<Shared>, Query(q): Query<BTreeMap<String, String>>) -> Result<Response, ApiError> {
    let gw = query_gw(&q, s.engine.config().target_gw)?;
    let s2 = s.clone();
    let method = q.get("method").cloned();
    let rows = tokio::task::spawn_blocking(move || s2.engine.forecasts(method.as_deref(), gw))
        .await
        .map_err(|e| ApiError::bad("internal", None, e.to_string()))??;
    Ok(Json(rows).into_response())
}

/// Reads a JSON body. On failure each top-level field is tried on its own so
/// the error can name the offending one.
fn parse_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    let body: &[u8] = if body.is_empty() { b"{}" } else { body };
    serde_json::from_slice(body).map_err(|e| {
        let field = serde_json::from_slice::<serde_json::Map<String, Value>>(body).ok().and_then(|map| {
            map.into_iter()
                .find(|(k, v)| serde_json::from_value::<T>(json!({ k.as_str(): v })).is_err())
                .map(|(k, _)| k)
        });
        ApiError::bad("json", field.as_deref(), e.to_string())
    })
}

async fn optimize(State(s): State<Shared>, body: Bytes) -> Result<Response, ApiError> {
    let req: OptimizeRequest = parse_body(&body)?;
    let res = tokio::task::spawn_blocking(move || s.engine.optimize(&req))
        .await
        .map_err(|e| ApiError::bad("internal", None, e.to_string()))??;
    Ok(Json(res).into_response())
}

fn value_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(value_text).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

async fn backtest(State(s): State<Shared>, body: Bytes) -> Result<Response, ApiError> {
    let BacktestRequest(fields) = parse_body(&body)?;
    let mut cfg = s.engine.config().clone();
    for (key, value) in &fields {
        if matches!(key.as_str(), "panel_path" | "season_length" | "split_week" | "output_dir") {
            return Err(ApiError::bad("invalid_argument", Some(key), format!("{key}: fixed by the server")));
        }
        cfg.set(key, &value_text(value)).map_err(|e| ApiError::bad(e.kind(), Some(key), e.to_string()))?;
    }
    cfg.validate().map_err(ApiError::from)?;
    let id = s.next_id.fetch_add(1, Ordering::SeqCst);
    let dir = s.reports_dir.join(id.to_string());
    s.jobs.lock().unwrap().insert(
        id,
        JobStatus { id, status: "queued".into(), bundle: Some(dir.display().to_string()), error: None, summary: None },
    );
    let state = s.clone();
    tokio::spawn(async move {
        let Ok(_permit) = state.workers.clone().acquire_owned().await else { return };
        set_status(&state, id, |j| j.status = "running".into());
        let worker = state.clone();
        let out = tokio::task::spawn_blocking(move || -> fpl_core::Result<Value> {
            let report = worker.engine.backtest(&cfg)?;
            report.write_bundle(&dir)?;
            std::fs::write(dir.join("run.conf"), cfg.to_text())?;
            Ok(serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json"))?)?)
        })
        .await;
        match out {
            Ok(Ok(summary)) => set_status(&state, id, |j| {
                j.status = "done".into();
                j.summary = Some(summary);
            }),
            Ok(Err(e)) => set_status(&state, id, |j| {
                j.status = "failed".into();
                j.error = Some(format!("{}: {e}", e.kind()));
            }),
            Err(e) => set_status(&state, id, |j| {
                j.status = "failed".into();
                j.error = Some(e.to_string());
            }),
        }
    });
    Ok((StatusCode::ACCEPTED, Json(json!({"id": id, "status": "queued"}))).into_response())
}

fn set_status(s: &AppState, id: u64, f: impl FnOnce(&mut JobStatus)) {
    if let Some(j) = s.jobs.lock().unwrap().get_mut(&id) {
        f(j);
    }
}

async fn report(State(s): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let not_found = || ApiError {
        status: StatusCode::NOT_FOUND,
        body: json!({"error": "not_found", "message": format!("no report `{id}`"), "field": "id"}),
    };
    let id: u64 = id.parse().map_err(|_| not_found())?;
    let job = s.jobs.lock().unwrap().get(&id).cloned().ok_or_else(not_found)?;
    Ok(Json(job).into_response())
}

/// Binds `addr` and serves until the process ends.
pub async fn serve(engine: Engine, addr: &str, workers: usize) -> std::io::Result<()> {
    let app = router(Arc::new(AppState::new(engine, workers)));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app).await
}
