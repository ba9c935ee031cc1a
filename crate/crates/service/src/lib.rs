//! HTTP JSON API over the hierarchical table engine.
//!
//! Every session holds one table and its transformation history. Writes to a
//! session are serialized; reads see the last committed state.

mod error;
mod store;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use hitailor_core::api::{
    ApiError, ApplyTo, Bundle, EntriesPage, RecommendQuery, RecommendationJson, ScriptRequest,
    SessionState, StoredVis, VisualizeRequest, VisualizeResponse,
};
use hitailor_core::importer::{from_json_str, parse_doc_str, serialize_htj, to_htj_string};
use hitailor_core::locator::{AxisIndex, Block, TableUnit};
use hitailor_core::model::{Axis, TableModel};
use hitailor_core::recommend::{recommend, Mechanism};
use hitailor_core::transform::{apply_script, TransformOp};
use hitailor_core::visgen::{rebind_all, template_catalog, VisTemplate};
use serde::Deserialize;

pub use error::{ApiResult, Failure};
pub use store::{SessionFile, Store};

pub const DEFAULT_MAX_TABLE_CELLS: usize = 1_000_000;
/// Largest side of an entries page.
pub const MAX_PAGE_SIDE: usize = 500;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub max_table_cells: usize,
    pub snapshot_dir: Option<PathBuf>,
    pub snapshot_interval: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            max_table_cells: DEFAULT_MAX_TABLE_CELLS,
            snapshot_dir: None,
            snapshot_interval: Duration::from_secs(30),
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    pub config: Arc<ServiceConfig>,
    pub store: Arc<Store>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState {
            config: Arc::new(config),
            store: Arc::new(Store::default()),
        }
    }

    /// Loads sessions from the snapshot directory, if one is configured.
    pub fn restore(&self) -> std::io::Result<usize> {
        match &self.config.snapshot_dir {
            Some(dir) => self.store.restore(dir),
            None => Ok(0),
        }
    }

    pub fn persist(&self) -> std::io::Result<usize> {
        match &self.config.snapshot_dir {
            Some(dir) => self.store.persist(dir),
            None => Ok(0),
        }
    }

    /// Periodically writes changed sessions to the snapshot directory.
    pub fn spawn_snapshots(&self) -> Option<tokio::task::JoinHandle<()>> {
        self.config.snapshot_dir.as_ref()?;
        let state = self.clone();
        Some(tokio::spawn(async move {
            let mut tick = tokio::time::interval(state.config.snapshot_interval);
            tick.tick().await;
            loop {
                tick.tick().await;
                if let Err(e) = state.persist() {
                    tracing::error!("snapshot failed: {e}");
                }
            }
        }))
    }

    fn check_size(&self, model: &TableModel) -> Result<(), ApiError> {
        let cells = model.cell_count();
        if cells > self.config.max_table_cells {
            return Err(ApiError::new(
                "TableTooLarge",
                format!("{cells} cells exceeds the limit of {}", self.config.max_table_cells),
            )
            .with_status(413));
        }
        Ok(())
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/templates", get(templates))
        .route("/tables", post(upload))
        .route("/tables/{id}", get(session_state).delete(delete_session))
        .route("/tables/{id}/transform", post(transform))
        .route("/tables/{id}/script", post(script))
        .route("/tables/{id}/undo", post(undo))
        .route("/tables/{id}/redo", post(redo))
        .route("/tables/{id}/recommend", get(recommendations))
        .route("/tables/{id}/visualize", post(visualize))
        .route("/tables/{id}/visualizations", get(visualizations))
        .route("/tables/{id}/export", get(export))
        .route("/tables/{id}/entries", get(entries))
        .fallback(|| async { Failure(ApiError::new("NotFound", "no such endpoint").with_status(404)) })
        .with_state(state)
}

/// Serves the API on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: AppState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}

fn body<T: serde::de::DeserializeOwned>(bytes: &Bytes) -> ApiResult<T> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Failure(ApiError::bad_request("SchemaError", format!("body is not UTF-8: {e}"))))?;
    Ok(from_json_str(text)?)
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> ApiResult<T> {
    q.map(|Query(t)| t)
        .map_err(|e| Failure(ApiError::bad_request("BadQuery", e.body_text())))
}

async fn templates() -> Json<Vec<VisTemplate>> {
    Json(template_catalog())
}

async fn upload(State(state): State<AppState>, bytes: Bytes) -> ApiResult<(StatusCode, Json<SessionState>)> {
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| Failure(ApiError::bad_request("SchemaError", format!("body is not UTF-8: {e}"))))?;
    let model = parse_doc_str(text)?;
    state.check_size(&model)?;
    let slot = state.store.insert(model);
    Ok((StatusCode::CREATED, Json(slot.view().state())))
}

async fn session_state(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<SessionState>> {
    Ok(Json(state.store.get(&id)?.view().state()))
}

async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    state.store.remove(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn transform(State(state): State<AppState>, Path(id): Path<String>, bytes: Bytes) -> ApiResult<Json<SessionState>> {
    let slot = state.store.get(&id)?;
    let op: TransformOp = body(&bytes)?;
    let ((), view) = slot
        .write(|s| {
            s.history.push(op)?;
            if let Err(e) = state.check_size(s.history.current()) {
                s.history.undo()?;
                return Err(e);
            }
            Ok(())
        })
        .await?;
    Ok(Json(view.state()))
}

async fn script(State(state): State<AppState>, Path(id): Path<String>, bytes: Bytes) -> ApiResult<Json<SessionState>> {
    let slot = state.store.get(&id)?;
    let req: ScriptRequest = body(&bytes)?;
    let ((), view) = slot
        .write(|s| {
            let before = s.history.len();
            s.history.push_all(&req.ops)?;
            if let Err(e) = state.check_size(s.history.current()) {
                while s.history.len() > before {
                    s.history.undo()?;
                }
                return Err(e);
            }
            Ok(())
        })
        .await?;
    Ok(Json(view.state()))
}

async fn undo(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<SessionState>> {
    let slot = state.store.get(&id)?;
    let ((), view) = slot.write(|s| s.history.undo().map(|_| ()).map_err(Into::into)).await?;
    Ok(Json(view.state()))
}

async fn redo(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<SessionState>> {
    let slot = state.store.get(&id)?;
    let ((), view) = slot.write(|s| s.history.redo().map(|_| ()).map_err(Into::into)).await?;
    Ok(Json(view.state()))
}

async fn recommendations(
    State(state): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<RecommendQuery>, QueryRejection>,
) -> ApiResult<Json<Vec<RecommendationJson>>> {
    let view = state.store.get(&id)?.view();
    let q = query(q)?;
    let (row, col) = q.locators()?;
    let unit = TableUnit::from_locators(&view.model, &row, &col)?;
    let recs = recommend(
        &view.model,
        &unit,
        q.mechanism.unwrap_or(Mechanism::Topology),
        q.row_range(),
        q.col_range(),
    )?;
    Ok(Json(recs.iter().map(RecommendationJson::from).collect()))
}

fn units_for(model: &TableModel, req: &VisualizeRequest) -> Result<Vec<TableUnit>, ApiError> {
    let unit = req.unit.resolve(model)?;
    Ok(match req.apply_to {
        ApplyTo::Selection => vec![unit],
        ApplyTo::Recommended => {
            let ranges = req.ranges.unwrap_or_default();
            recommend(model, &unit, req.mechanism.unwrap_or(Mechanism::Topology), ranges.row, ranges.col)?
                .into_iter()
                .map(|r| r.unit)
                .collect()
        }
    })
}

async fn visualize(State(state): State<AppState>, Path(id): Path<String>, bytes: Bytes) -> ApiResult<Json<VisualizeResponse>> {
    let slot = state.store.get(&id)?;
    let req: VisualizeRequest = body(&bytes)?;
    if req.name.as_deref().is_some_and(|n| n.trim().is_empty()) {
        return Err(Failure(ApiError::bad_request("BadName", "configuration name is empty")));
    }
    let (resp, _) = slot
        .write(|s| {
            let model = s.history.current();
            let units = units_for(model, &req)?;
            let docs = rebind_all(model, &req.config, &units, req.cell.unwrap_or_default())?;
            let name = req
                .name
                .clone()
                .unwrap_or_else(|| format!("config-{}", s.visualizations.len() + 1));
            s.visualizations.insert(
                name.clone(),
                StoredVis {
                    request: req.clone(),
                    docs: docs.clone(),
                },
            );
            Ok(VisualizeResponse { config_name: name, docs })
        })
        .await?;
    Ok(Json(resp))
}

async fn visualizations(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<std::collections::BTreeMap<String, StoredVis>>> {
    let view = state.store.get(&id)?.view();
    Ok(Json((*view.visualizations).clone()))
}

#[derive(Debug, Deserialize)]
struct ExportQuery {
    #[serde(default)]
    format: Option<String>,
}

async fn export(
    State(state): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<ExportQuery>, QueryRejection>,
) -> ApiResult<Json<serde_json::Value>> {
    let view = state.store.get(&id)?.view();
    let q = query(q)?;
    if cfg!(debug_assertions) {
        let replayed = apply_script(&view.initial, &view.ops).expect("recorded ops replay");
        assert_eq!(to_htj_string(&replayed), to_htj_string(&view.model), "history replay diverged");
    }
    let value = match q.format.as_deref().unwrap_or("htj") {
        "htj" => serde_json::to_value(serialize_htj(&view.model)),
        "bundle" => serde_json::to_value(Bundle {
            initial: serialize_htj(&view.initial),
            ops: view.ops.clone(),
            model: serialize_htj(&view.model),
            configs: view
                .visualizations
                .iter()
                .map(|(k, v)| (k.clone(), v.request.config.clone()))
                .collect(),
            docs: view
                .visualizations
                .iter()
                .map(|(k, v)| (k.clone(), v.docs.clone()))
                .collect(),
        }),
        other => {
            return Err(Failure(ApiError::bad_request(
                "BadFormat",
                format!("unknown export format {other:?}; expected htj or bundle"),
            )))
        }
    };
    Ok(Json(value.expect("export serializes")))
}

#[derive(Debug, Deserialize)]
struct EntriesQuery {
    row_start: Option<usize>,
    row_end: Option<usize>,
    col_start: Option<usize>,
    col_end: Option<usize>,
}

fn page_range(start: Option<usize>, end: Option<usize>, len: usize, axis: &str) -> Result<std::ops::Range<usize>, ApiError> {
    let start = start.unwrap_or(0);
    let end = end.unwrap_or_else(|| len.min(start + MAX_PAGE_SIDE));
    if start > end || end > len {
        return Err(ApiError::bad_request(
            "BadRange",
            format!("{axis} range {start}..{end} is outside 0..{len}"),
        ));
    }
    if end - start > MAX_PAGE_SIDE {
        return Err(ApiError::bad_request(
            "BadRange",
            format!("{axis} range {start}..{end} is longer than {MAX_PAGE_SIDE}"),
        ));
    }
    Ok(start..end)
}

fn leaf_paths(model: &TableModel, axis: Axis, range: std::ops::Range<usize>) -> Vec<Vec<String>> {
    let index = AxisIndex::new(model, axis);
    range
        .map(|k| {
            let node = index.leaf_node(k).expect("leaf in range");
            index.path(node).into_iter().map(str::to_string).collect()
        })
        .collect()
}

async fn entries(
    State(state): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<EntriesQuery>, QueryRejection>,
) -> ApiResult<Json<EntriesPage>> {
    let view = state.store.get(&id)?.view();
    let q = query(q)?;
    let (rows, cols) = view.model.shape();
    let r = page_range(q.row_start, q.row_end, rows, "row")?;
    let c = page_range(q.col_start, q.col_end, cols, "col")?;
    let values = r
        .clone()
        .map(|i| c.clone().map(|j| view.model.entry(i, j).clone()).collect())
        .collect();
    Ok(Json(EntriesPage {
        block: Block::new(r.clone(), c.clone()),
        row_paths: leaf_paths(&view.model, Axis::Row, r),
        col_paths: leaf_paths(&view.model, Axis::Col, c),
        values,
    }))
}
