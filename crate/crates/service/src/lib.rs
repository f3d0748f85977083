//! HTTP/JSON facade over `gks-core`: named tables and structures held in
//! memory, every library operation exposed as an endpoint.

mod state;

use std::collections::{BTreeMap, BTreeSet};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use gks_core::export::{
    gks_to_dot, gks_to_json, DotOptions, ExtensionDisplay, GksRecord, RankDirection, Snapshot,
};
use gks_core::table::IdColumn;
use gks_core::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::services::ServeDir;

pub use state::{Registry, SessionState};

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: String,
    pub message: String,
    pub detail: Value,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code: code.to_string(),
            message: message.into(),
            detail: Value::Null,
        }
    }

    fn not_found(kind: &str, name: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "NotFound",
            format!("no {kind} named {name:?}"),
        )
    }

    fn conflict(kind: &str, name: &str) -> Self {
        Self::new(
            StatusCode::CONFLICT,
            "NameTaken",
            format!("a {kind} named {name:?} already exists"),
        )
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "BadRequest", message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let detail = match &e {
            Error::Syntax(s) => {
                json!({"offset": s.offset, "expected": s.expected, "found": s.found})
            }
            _ => Value::Null,
        };
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code: e.code().to_string(),
            message: e.to_string(),
            detail,
        }
    }
}

impl From<SyntaxError> for ApiError {
    fn from(e: SyntaxError) -> Self {
        Error::from(e).into()
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"code": self.code, "message": self.message, "detail": self.detail});
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

fn table(reg: &Registry, name: &str) -> ApiResult<Arc<InformationTable>> {
    reg.tables
        .get(name)
        .cloned()
        .ok_or_else(|| ApiError::not_found("table", name))
}

fn structure(reg: &Registry, name: &str) -> ApiResult<Arc<Gks>> {
    reg.structures
        .get(name)
        .cloned()
        .ok_or_else(|| ApiError::not_found("structure", name))
}

/// Stores `t` under its own name; an existing table of that name must be
/// identical.
fn register_table(reg: &mut Registry, t: &Arc<InformationTable>) -> ApiResult<()> {
    match reg.tables.get(t.name()) {
        Some(existing) if **existing != **t => Err(ApiError::conflict("table", t.name())),
        Some(_) => Ok(()),
        None => {
            reg.tables.insert(t.name().to_string(), Arc::clone(t));
            Ok(())
        }
    }
}

fn register_structure(reg: &mut Registry, name: &str, g: Gks) -> ApiResult<Arc<Gks>> {
    if reg.structures.contains_key(name) {
        return Err(ApiError::conflict("structure", name));
    }
    register_table(reg, g.table())?;
    let g = Arc::new(g);
    reg.structures.insert(name.to_string(), Arc::clone(&g));
    Ok(g)
}

#[derive(Debug, Serialize)]
pub struct TableSummary {
    pub name: String,
    pub objects: usize,
    pub attributes: Vec<String>,
    pub domains: BTreeMap<String, Vec<String>>,
}

impl TableSummary {
    pub fn of(t: &InformationTable) -> Self {
        TableSummary {
            name: t.name().to_string(),
            objects: t.len(),
            attributes: t.attributes().to_vec(),
            domains: t
                .attributes()
                .iter()
                .map(|a| {
                    let values = t
                        .value_domain(a)
                        .map(|d| d.iter().map(String::from).collect());
                    (a.clone(), values.unwrap_or_default())
                })
                .collect(),
        }
    }
}

#[derive(Debug, Deserialize)]
struct UploadParams {
    name: String,
    id_column: Option<String>,
    missing: Option<String>,
    sep: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BuildRequest {
    table: String,
    attribute: String,
    name: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneralizeRequest {
    inputs: Vec<String>,
    attribute: String,
    value: String,
    label: Option<String>,
    name: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BinaryRequest {
    left: String,
    right: String,
    name: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SharedGranule {
    attribute: String,
    value: String,
    label: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductRequest {
    left: String,
    right: String,
    left_children: Option<Vec<String>>,
    right_children: Option<Vec<String>>,
    shared: Option<SharedGranule>,
    #[serde(default)]
    keep_empty: bool,
    name: Option<String>,
}

/// A node given by numeric id or by id/label text.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum NodeKey {
    Id(u32),
    Key(String),
}

fn resolve_all(g: &Gks, keys: &[NodeKey]) -> ApiResult<BTreeSet<NodeId>> {
    keys.iter()
        .map(|k| match k {
            NodeKey::Id(i) => g.node(NodeId(*i)).map(|_| NodeId(*i)),
            NodeKey::Key(s) => g.resolve(s),
        })
        .collect::<Result<_>>()
        .map_err(Into::into)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ZoomRequest {
    direction: String,
    nodes: Vec<NodeKey>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SwitchRequest {
    upper: Vec<NodeKey>,
    lower: Vec<NodeKey>,
    /// Store the result under a new name instead of replacing the input.
    name: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalRequest {
    table: String,
    formula: String,
}

#[derive(Debug, Default, Deserialize)]
struct DotParams {
    extensions: Option<String>,
    rank: Option<String>,
}

fn structure_response(
    revision: u64,
    name: &str,
    g: &Gks,
    delta: Option<&StructureDelta>,
) -> Json<Value> {
    let mut body = json!({"revision": revision, "name": name, "gks": GksRecord::from(g)});
    if let Some(d) = delta {
        body["delta"] = serde_json::to_value(d).expect("deltas serialize");
    }
    Json(body)
}

async fn get_state(State(state): State<Arc<SessionState>>) -> Json<Value> {
    let reg = state.read();
    Json(json!({
        "revision": reg.revision,
        "tables": reg.tables.keys().collect::<Vec<_>>(),
        "structures": reg.structures.keys().collect::<Vec<_>>(),
    }))
}

async fn upload_table(
    State(state): State<Arc<SessionState>>,
    Query(params): Query<UploadParams>,
    body: Bytes,
) -> ApiResult<Response> {
    let mut config = IngestConfig::named(&params.name);
    if let Some(c) = params.id_column {
        config.id_column = match c.parse::<usize>() {
            Ok(i) => IdColumn::Index(i),
            Err(_) => IdColumn::Name(c),
        };
    }
    if let Some(m) = params.missing {
        config.missing = m;
    }
    if let Some(s) = params.sep {
        config.separator = s;
    }
    let t = Arc::new(ingest_csv(&body[..], &config)?);
    let (revision, ()) = state.mutate(|reg| {
        if reg.tables.contains_key(t.name()) {
            return Err(ApiError::conflict("table", t.name()));
        }
        register_table(reg, &t)
    })?;
    let body = json!({"revision": revision, "table": TableSummary::of(&t)});
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

async fn get_table(
    State(state): State<Arc<SessionState>>,
    Path(name): Path<String>,
) -> ApiResult<Json<Value>> {
    let t = table(&state.read(), &name)?;
    Ok(Json(json!({"summary": TableSummary::of(&t), "table": &*t})))
}

async fn build(State(state): State<Arc<SessionState>>, body: Bytes) -> ApiResult<Json<Value>> {
    let req: BuildRequest = parse_body(&body)?;
    let name = req
        .name
        .unwrap_or_else(|| format!("{}.{}", req.table, req.attribute));
    let (revision, g) = state.mutate(|reg| {
        let g = build_attribute_value_structure(&table(reg, &req.table)?, &req.attribute)?;
        register_structure(reg, &name, g)
    })?;
    Ok(structure_response(revision, &name, &g, None))
}

async fn operate(
    State(state): State<Arc<SessionState>>,
    Path(op): Path<String>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    match op.as_str() {
        "generalize" => {
            let req: GeneralizeRequest = parse_body(&body)?;
            let label = req.label.unwrap_or_else(|| req.value.clone());
            let name = req.name.unwrap_or_else(|| label.clone());
            let shared = AtomicFormula::eq(&req.attribute, &req.value);
            let (revision, g) = state.mutate(|reg| {
                let inputs: Vec<Gks> = req
                    .inputs
                    .iter()
                    .map(|n| structure(reg, n).map(|g| (*g).clone()))
                    .collect::<ApiResult<_>>()?;
                register_structure(reg, &name, generalize(&inputs, &shared, &label)?)
            })?;
            Ok(structure_response(revision, &name, &g, None))
        }
        "union" | "intersect" | "difference" => {
            let req: BinaryRequest = parse_body(&body)?;
            let name = req
                .name
                .unwrap_or_else(|| format!("{op}({},{})", req.left, req.right));
            let f = match op.as_str() {
                "union" => union_gks,
                "intersect" => intersect_gks,
                _ => difference_gks,
            };
            let (revision, (g, delta)) = state.mutate(|reg| {
                let (g, delta) = f(&*structure(reg, &req.left)?, &*structure(reg, &req.right)?)?;
                Ok::<_, ApiError>((register_structure(reg, &name, g)?, delta))
            })?;
            Ok(structure_response(revision, &name, &g, Some(&delta)))
        }
        "product" => {
            let req: ProductRequest = parse_body(&body)?;
            let name = req
                .name
                .unwrap_or_else(|| format!("product({},{})", req.left, req.right));
            let opts = ProductOptions {
                shared: req.shared.map(|s| {
                    let label = s.label.unwrap_or_else(|| s.value.clone());
                    (AtomicFormula::eq(s.attribute, s.value), label)
                }),
                keep_empty: req.keep_empty,
            };
            let (revision, g) = state.mutate(|reg| {
                let left = ProductFactor::from_two_level(
                    &*structure(reg, &req.left)?,
                    req.left_children.as_deref(),
                )?;
                let right = ProductFactor::from_two_level(
                    &*structure(reg, &req.right)?,
                    req.right_children.as_deref(),
                )?;
                register_structure(reg, &name, product(&left, &right, &opts)?)
            })?;
            Ok(structure_response(revision, &name, &g, None))
        }
        other => Err(ApiError::not_found("operation", other)),
    }
}

async fn zoom_nodes(
    State(state): State<Arc<SessionState>>,
    Path(name): Path<String>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let req: ZoomRequest = parse_body(&body)?;
    let direction: Direction = req.direction.parse().map_err(ApiError::bad_request)?;
    let reg = state.read();
    let g = structure(&reg, &name)?;
    let selected = zoom(&g, direction, &resolve_all(&g, &req.nodes)?)?;
    let labels: Vec<&str> = selected
        .iter()
        .map(|n| g.node(*n).map(|g| g.label()))
        .collect::<Result<_>>()?;
    Ok(Json(
        json!({"revision": reg.revision, "nodes": selected, "labels": labels}),
    ))
}

async fn switch(
    State(state): State<Arc<SessionState>>,
    Path(name): Path<String>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let req: SwitchRequest = parse_body(&body)?;
    let target = req.name.clone().unwrap_or_else(|| name.clone());
    let (revision, g) = state.mutate(|reg| {
        let g = structure(reg, &name)?;
        let switched = switch_view(
            &g,
            &resolve_all(&g, &req.upper)?,
            &resolve_all(&g, &req.lower)?,
        )?;
        if req.name.is_some() {
            register_structure(reg, &target, switched)
        } else {
            let switched = Arc::new(switched);
            reg.structures.insert(target.clone(), Arc::clone(&switched));
            Ok(switched)
        }
    })?;
    Ok(structure_response(revision, &target, &g, None))
}

async fn get_gks(
    State(state): State<Arc<SessionState>>,
    Path(name): Path<String>,
) -> ApiResult<Response> {
    let g = structure(&state.read(), &name)?;
    Ok((
        [(header::CONTENT_TYPE, "application/json")],
        gks_to_json(&g),
    )
        .into_response())
}

async fn get_dot(
    State(state): State<Arc<SessionState>>,
    Path(name): Path<String>,
    Query(params): Query<DotParams>,
) -> ApiResult<Response> {
    let g = structure(&state.read(), &name)?;
    let extensions = match params.extensions.as_deref() {
        None | Some("hidden") => ExtensionDisplay::Hidden,
        Some("ids") => ExtensionDisplay::Ids,
        Some("count") => ExtensionDisplay::Count,
        Some(other) => {
            return Err(ApiError::bad_request(format!(
                "unknown extensions mode {other:?}"
            )))
        }
    };
    let rank = match params.rank.as_deref() {
        None | Some("bt") => RankDirection::CoarseAtBottom,
        Some("tb") => RankDirection::CoarseAtTop,
        Some(other) => {
            return Err(ApiError::bad_request(format!(
                "unknown rank direction {other:?}"
            )))
        }
    };
    let opts = DotOptions {
        extensions,
        rank,
        ..Default::default()
    };
    Ok((
        [(header::CONTENT_TYPE, "text/vnd.graphviz")],
        gks_to_dot(&g, &opts),
    )
        .into_response())
}

async fn eval(State(state): State<Arc<SessionState>>, body: Bytes) -> ApiResult<Json<Value>> {
    let req: EvalRequest = parse_body(&body)?;
    let t = table(&state.read(), &req.table)?;
    let f = parse_formula(&req.formula)?;
    let extension = evaluate(&f, &t)?;
    Ok(Json(
        json!({"intension": f.canonical_text(), "extension": extension}),
    ))
}

pub fn router(state: Arc<SessionState>) -> Router {
    Router::new()
        .route("/state", get(get_state))
        .route("/tables", post(upload_table))
        .route("/tables/{name}", get(get_table))
        .route("/gks/build", post(build))
        .route("/gks/{op}", post(operate).get(get_gks))
        .route("/gks/{name}/dot", get(get_dot))
        .route("/gks/{name}/zoom", post(zoom_nodes))
        .route("/gks/{name}/switch-view", post(switch))
        .route("/eval", post(eval))
        .with_state(state)
}

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub bind: SocketAddr,
    /// Directory of static UI assets served under `/`.
    pub assets: Option<PathBuf>,
    /// Registries are loaded from here at startup (if present) and written
    /// back on shutdown.
    pub snapshot: Option<PathBuf>,
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig {
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            assets: None,
            snapshot: None,
        }
    }
}

pub fn load_snapshot(path: &std::path::Path) -> std::io::Result<Registry> {
    let text = std::fs::read_to_string(path)?;
    let snapshot: Snapshot = serde_json::from_str(&text)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
    Registry::from_snapshot(snapshot)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}

pub fn write_snapshot(path: &std::path::Path, registry: &Registry) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(&registry.snapshot()).expect("snapshots serialize");
    std::fs::write(path, text)
}

/// Runs the service until Ctrl-C.
pub async fn serve(config: ServeConfig) -> std::io::Result<()> {
    let state = match &config.snapshot {
        Some(path) if path.exists() => Arc::new(SessionState::with_registry(load_snapshot(path)?)),
        _ => Arc::new(SessionState::new()),
    };
    let mut app = router(Arc::clone(&state));
    if let Some(dir) = &config.assets {
        app = app.fallback_service(ServeDir::new(dir));
    }
    let listener = tokio::net::TcpListener::bind(config.bind).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    if let Some(path) = &config.snapshot {
        write_snapshot(path, &state.read())?;
        tracing::info!(path = %path.display(), "snapshot written");
    }
    Ok(())
}
