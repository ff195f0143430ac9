// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use harmnet_core::ingest::GraphDocument;
use harmnet_core::metrics::{Aggregator, LevelRow};
use harmnet_core::whatif::{rank_report, scored_breakdown, RankingKind, ScenarioOverlay};
use harmnet_core::{HarmConfig, HarmGraph, NodeId, PathScheme, ScoreReport};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use uuid::Uuid;

use crate::error::{ApiError, FieldError};
use crate::state::{JobState, Session, Shared};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
const DEFAULT_TOP_N: usize = 20;

type ApiResult<T> = Result<T, ApiError>;

/// A node named by label, or by numeric id when given as a JSON number.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NodeRef {
    Id(u32),
    Label(String),
}

impl NodeRef {
    fn resolve(&self, g: &HarmGraph) -> ApiResult<NodeId> {
        match self {
            NodeRef::Id(i) if g.contains(NodeId(*i)) => Ok(NodeId(*i)),
            NodeRef::Id(i) => Err(ApiError::not_found(format!("unknown node id {i}"))),
            NodeRef::Label(l) => g
                .node(l)
                .ok_or_else(|| ApiError::not_found(format!("unknown node `{l}`"))),
        }
    }
}

/// Path segments try the label first, then a numeric id.
fn resolve_segment(g: &HarmGraph, seg: &str) -> ApiResult<NodeId> {
    if let Some(id) = g.node(seg) {
        return Ok(id);
    }
    match seg.parse::<u32>() {
        Ok(i) => NodeRef::Id(i).resolve(g),
        Err(_) => NodeRef::Label(seg.to_string()).resolve(g),
    }
}

fn field_path(path: &serde_path_to_error::Path) -> String {
    let p = path.to_string();
    if p == "." {
        "body".to_string()
    } else {
        p
    }
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    let bytes: &[u8] = if body.iter().all(u8::is_ascii_whitespace) { b"{}" } else { body };
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = field_path(e.path());
        ApiError::field(&field, e.into_inner().to_string())
    })
}

/// Parses and validates a config object, reporting every bad field at once.
pub fn parse_config(value: Option<Value>) -> ApiResult<HarmConfig> {
    let Some(value) = value else {
        return Ok(HarmConfig::default());
    };
    let cfg: HarmConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let field = format!("config.{}", field_path(e.path()));
        ApiError::field(field.trim_end_matches(".body"), e.into_inner().to_string())
    })?;
    let mut fields = Vec::new();
    if !(cfg.alpha.is_finite() && cfg.alpha > 0.0 && cfg.alpha <= 1.0) {
        fields.push(FieldError::new("config.alpha", format!("{} is outside (0, 1]", cfg.alpha)));
    }
    for (name, agg) in [("config.inner", cfg.inner), ("config.outer", cfg.outer)] {
        if let Aggregator::TopK(k) = agg {
            if let Err(e) = Aggregator::top_k(k) {
                fields.push(FieldError::new(name, e.to_string()));
            }
        }
    }
    match cfg.m_max {
        Some(0) => fields.push(FieldError::new("config.mmax", "must be at least 1")),
        None if cfg.scheme == PathScheme::AllPaths
            && (cfg.inner != Aggregator::Sum || cfg.outer != Aggregator::Sum) =>
        {
            fields.push(FieldError::new(
                "config.mmax",
                "required for walks unless inner and outer are both sum",
            ))
        }
        _ => {}
    }
    if !fields.is_empty() {
        return Err(ApiError::invalid(fields));
    }
    cfg.validate().map_err(ApiError::from)?;
    Ok(cfg)
}

/// Runs CPU-bound work off the async executor.
async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    F: FnOnce() -> ApiResult<T> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

pub(crate) async fn health(State(state): State<Shared>) -> Json<Value> {
    let (status, nodes, edges) = match state.graph() {
        Some(g) => ("ok", g.node_count(), g.edge_count()),
        None => ("loading", 0, 0),
    };
    Json(json!({ "status": status, "version": VERSION, "nodes": nodes, "edges": edges }))
}

pub(crate) async fn graph(State(state): State<Shared>) -> ApiResult<Json<Value>> {
    let g = state.require_graph()?;
    let labels: BTreeMap<&str, u32> = g.nodes().map(|v| (g.label(v), v.0)).collect();
    Ok(Json(json!({ "graph": GraphDocument::from_graph(&g), "labels": labels })))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScoreRequest {
    target: NodeRef,
    #[serde(default)]
    config: Option<Value>,
}

pub(crate) async fn score(State(state): State<Shared>, body: Bytes) -> ApiResult<Json<ScoreReport>> {
    let g = state.require_graph()?;
    let req: ScoreRequest = parse_body(&body)?;
    let cfg = parse_config(req.config)?;
    let target = req.target.resolve(&g)?;
    blocking(move || {
        let b = scored_breakdown(&g, &ScenarioOverlay::new(), target, &cfg)?;
        Ok(Json(ScoreReport::new(&g, b, &cfg)))
    })
    .await
}

#[derive(Debug, Serialize)]
struct OverrideView {
    node: NodeId,
    label: String,
    harm: f64,
    base_harm: f64,
}

#[derive(Debug, Serialize)]
struct RemovalView {
    node: NodeId,
    label: String,
}

#[derive(Debug, Serialize)]
pub(crate) struct SessionView {
    id: Uuid,
    target: String,
    config: HarmConfig,
    overrides: Vec<OverrideView>,
    removed: Vec<RemovalView>,
    #[serde(rename = "H")]
    value: f64,
    baseline: f64,
    delta: f64,
    m_max: usize,
    levels: Vec<LevelRow>,
}

fn view(g: &HarmGraph, s: &Session) -> ApiResult<SessionView> {
    let b = scored_breakdown(g, &s.overlay, s.target, &s.config)?;
    Ok(SessionView {
        id: s.id,
        target: g.label(s.target).to_string(),
        config: s.config,
        overrides: s
            .overlay
            .harm_overrides
            .iter()
            .map(|(&node, &harm)| OverrideView {
                node,
                label: g.label(node).to_string(),
                harm,
                base_harm: g.harm(node),
            })
            .collect(),
        removed: s
            .overlay
            .removed_nodes
            .iter()
            .map(|&node| RemovalView {
                node,
                label: g.label(node).to_string(),
            })
            .collect(),
        value: b.value,
        baseline: s.baseline,
        delta: b.value - s.baseline,
        m_max: b.m_max,
        levels: b.levels,
    })
}

fn baseline(g: &HarmGraph, target: NodeId, cfg: &HarmConfig) -> ApiResult<f64> {
    Ok(scored_breakdown(g, &ScenarioOverlay::new(), target, cfg)?.value)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SessionRequest {
    target: NodeRef,
    #[serde(default)]
    config: Option<Value>,
}

pub(crate) async fn create_session(State(state): State<Shared>, body: Bytes) -> ApiResult<Response> {
    let g = state.require_graph()?;
    let req: SessionRequest = parse_body(&body)?;
    let config = parse_config(req.config)?;
    let target = req.target.resolve(&g)?;
    let session = Session {
        id: Uuid::new_v4(),
        target,
        config,
        overlay: ScenarioOverlay::new(),
        baseline: baseline(&g, target, &config)?,
    };
    let v = view(&g, &session)?;
    state.insert_session(session);
    Ok((StatusCode::CREATED, Json(v)).into_response())
}

/// Locks the session, applies `edit`, and returns the refreshed view. The
/// edit is rolled back if the edited overlay cannot be scored.
async fn with_session<F>(state: Shared, id: String, edit: F) -> ApiResult<Json<SessionView>>
where
    F: FnOnce(&HarmGraph, &mut Session) -> ApiResult<()> + Send + 'static,
{
    let g = state.require_graph()?;
    let cell = state.session(&id)?;
    let mut guard = cell.session.clone().lock_owned().await;
    blocking(move || {
        let s = &mut *guard;
        let before = (s.overlay.clone(), s.config, s.baseline);
        edit(&g, s)?;
        match view(&g, s) {
            Ok(v) => Ok(Json(v)),
            Err(e) => {
                (s.overlay, s.config, s.baseline) = before;
                Err(e)
            }
        }
    })
    .await
}

pub(crate) async fn get_session(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<SessionView>> {
    with_session(state, id, |_, _| Ok(())).await
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OverrideRequest {
    node: NodeRef,
    harm: f64,
}

pub(crate) async fn set_override(
    State(state): State<Shared>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<SessionView>> {
    let req: OverrideRequest = parse_body(&body)?;
    with_session(state, id, move |g, s| {
        let node = req.node.resolve(g)?;
        Ok(s.overlay.set_override(node, req.harm)?)
    })
    .await
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRequest {
    node: NodeRef,
}

pub(crate) async fn remove_node(
    State(state): State<Shared>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<SessionView>> {
    let req: NodeRequest = parse_body(&body)?;
    with_session(state, id, move |g, s| {
        let node = req.node.resolve(g)?;
        if node == s.target {
            return Err(ApiError::conflict("the session target cannot be removed"));
        }
        Ok(s.overlay.remove(node)?)
    })
    .await
}

pub(crate) async fn clear_override(
    State(state): State<Shared>,
    Path((id, node)): Path<(String, String)>,
) -> ApiResult<Json<SessionView>> {
    with_session(state, id, move |g, s| {
        let v = resolve_segment(g, &node)?;
        if !s.overlay.clear_override(v) {
            return Err(ApiError::not_found(format!("`{node}` has no override")));
        }
        Ok(())
    })
    .await
}

pub(crate) async fn restore_node(
    State(state): State<Shared>,
    Path((id, node)): Path<(String, String)>,
) -> ApiResult<Json<SessionView>> {
    with_session(state, id, move |g, s| {
        let v = resolve_segment(g, &node)?;
        if !s.overlay.restore(v) {
            return Err(ApiError::not_found(format!("`{node}` is not removed")));
        }
        Ok(())
    })
    .await
}

pub(crate) async fn reset_session(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<SessionView>> {
    with_session(state, id, |_, s| {
        s.overlay = ScenarioOverlay::new();
        Ok(())
    })
    .await
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigRequest {
    #[serde(default)]
    target: Option<NodeRef>,
    #[serde(default)]
    config: Option<Value>,
}

/// Changes the pinned target and/or config and recomputes the baseline.
pub(crate) async fn set_config(
    State(state): State<Shared>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<SessionView>> {
    let req: ConfigRequest = parse_body(&body)?;
    let config = match req.config {
        Some(v) => Some(parse_config(Some(v))?),
        None => None,
    };
    with_session(state, id, move |g, s| {
        if let Some(t) = &req.target {
            let t = t.resolve(g)?;
            if s.overlay.removed_nodes.contains(&t) {
                return Err(ApiError::conflict("the new target is removed in this session"));
            }
            s.target = t;
        }
        if let Some(c) = config {
            s.config = c;
        }
        s.baseline = baseline(g, s.target, &s.config)?;
        Ok(())
    })
    .await
}

pub(crate) async fn delete_session(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    state.drop_session(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RankingRequest {
    #[serde(default)]
    target: Option<NodeRef>,
    kind: RankingKind,
    #[serde(default)]
    config: Option<Value>,
    #[serde(default)]
    top_n: Option<usize>,
}

pub(crate) async fn rankings(State(state): State<Shared>, body: Bytes) -> ApiResult<Response> {
    let g = state.require_graph()?;
    let req: RankingRequest = parse_body(&body)?;
    let cfg = parse_config(req.config)?;
    let top_n = req.top_n.unwrap_or(DEFAULT_TOP_N);
    if top_n == 0 {
        return Err(ApiError::field("top_n", "must be at least 1"));
    }
    let target = match (&req.target, req.kind) {
        (Some(t), _) => t.resolve(&g)?,
        (None, RankingKind::Global) => NodeId(0),
        (None, _) => return Err(ApiError::field("target", "required for this ranking kind")),
    };

    let job = state.new_job();
    let (tx, rx) = tokio::sync::oneshot::channel();
    let worker = state.clone();
    tokio::spawn(async move {
        let outcome = match worker.pool.clone().acquire_owned().await {
            Ok(permit) => {
                blocking(move || {
                    let _permit = permit;
                    let report = rank_report(&g, target, req.kind, &cfg, top_n)?;
                    serde_json::to_value(report).map_err(|e| ApiError::internal(e.to_string()))
                })
                .await
            }
            Err(_) => Err(ApiError::internal("worker pool closed")),
        };
        let finished = match &outcome {
            Ok(v) => JobState::Done(v.clone()),
            Err(e) => JobState::Failed(e.body()),
        };
        worker.finish_job(job, finished);
        let _ = tx.send(outcome);
    });

    match tokio::time::timeout(state.settings.ranking_timeout, rx).await {
        Ok(Ok(Ok(report))) => Ok(Json(report).into_response()),
        Ok(Ok(Err(e))) => Err(e),
        Ok(Err(_)) => Err(ApiError::internal("ranking worker vanished")),
        Err(_) => Ok((
            StatusCode::ACCEPTED,
            Json(json!({ "job": job, "status": "pending", "poll": format!("/api/jobs/{job}") })),
        )
            .into_response()),
    }
}

pub(crate) async fn job(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    Ok(Json(match state.job(&id)? {
        JobState::Pending => json!({ "job": id, "status": "pending" }),
        JobState::Done(result) => json!({ "job": id, "status": "done", "result": result }),
        JobState::Failed(error) => json!({ "job": id, "status": "failed", "error": error }),
    }))
}
