//! HTTP/JSON API over an in-memory workspace store.
//!
//! | method | path                         | body                                   |
//! |--------|------------------------------|----------------------------------------|
//! | POST   | `/workspaces`                | `{model, schema, catalogue}` texts     |
//! | GET    | `/workspaces`                | -                                      |
//! | GET    | `/workspaces/{id}`           | -                                      |
//! | GET    | `/workspaces/{id}/schema`    | -                                      |
//! | POST   | `/workspaces/{id}/rank`      | `{situation, mode?, top?}`             |
//! | PUT    | `/workspaces/{id}/catalogue` | `.prefs` text, raw or `{catalogue}`    |
//! | POST   | `/workspaces/{id}/compare`   | `{left, right, mode?, top?}`           |
//!
//! Every workspace response carries its version in `x-workspace-version`.
//! Sending `If-Match: <version>` makes the request fail with 409 when the
//! workspace has moved on.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Path as UrlPath, State};
use axum::http::{header, HeaderMap, HeaderName, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use goalrank_core::{
    rank_bound, BoundCatalogue, ContextSchema, GoalModel, RankError, RankingReport, ScoringMode, Situation,
    DEFAULT_SOLUTION_CAP,
};
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::cors::{Any, CorsLayer};

use crate::dsl::{
    bind_warnings, parse_catalogue_spanned, parse_context_schema, parse_goal_model, parse_situation, ranking_doc,
    Diagnostic, Diagnostics, Severity, SpannedCatalogue,
};
use crate::load::{bind_spanned, Fixture, LoadError};

pub const VERSION_HEADER: &str = "x-workspace-version";

/// An immutable snapshot; edits swap in a new one.
#[derive(Debug)]
pub struct Workspace {
    pub id: String,
    pub version: u64,
    pub created_at: u64,
    pub model: GoalModel,
    pub schema: ContextSchema,
    pub catalogue: SpannedCatalogue,
    pub catalogue_text: String,
    pub bound: BoundCatalogue,
}

#[derive(Debug, Default)]
pub struct Store {
    workspaces: RwLock<HashMap<String, Arc<Workspace>>>,
    next_id: AtomicU64,
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn diag_json(d: &Diagnostic) -> Value {
    json!({
        "severity": match d.severity { Severity::Error => "error", Severity::Warning => "warning" },
        "code": d.code.name(),
        "message": d.message,
        "file": d.span.file,
        "line": d.span.line,
        "column": d.span.column,
    })
}

fn diags_json(ds: &[Diagnostic]) -> Value {
    Value::Array(ds.iter().map(diag_json).collect())
}

/// Failure responses.
#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    Invalid(Vec<Diagnostic>),
    Unprocessable(String),
    Conflict { current: u64 },
    BadRequest(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::NotFound(id) => (StatusCode::NOT_FOUND, json!({"error": format!("unknown workspace `{id}`")})),
            ApiError::Invalid(ds) => (
                StatusCode::UNPROCESSABLE_ENTITY,
                json!({"error": "validation failed", "diagnostics": diags_json(&ds)}),
            ),
            ApiError::Unprocessable(msg) => (StatusCode::UNPROCESSABLE_ENTITY, json!({"error": msg, "diagnostics": []})),
            ApiError::Conflict { current } => (
                StatusCode::CONFLICT,
                json!({"error": "workspace version has changed", "version": current}),
            ),
            ApiError::BadRequest(msg) => (StatusCode::BAD_REQUEST, json!({"error": msg})),
        };
        (status, Json(body)).into_response()
    }
}

impl From<Diagnostics> for ApiError {
    fn from(d: Diagnostics) -> Self {
        ApiError::Invalid(d.0)
    }
}

impl From<RankError> for ApiError {
    fn from(e: RankError) -> Self {
        ApiError::Unprocessable(e.to_string())
    }
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, id: &str) -> Option<Arc<Workspace>> {
        self.workspaces.read().expect("store lock").get(id).cloned()
    }

    pub fn ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.workspaces.read().expect("store lock").keys().cloned().collect();
        ids.sort();
        ids
    }

    fn build(
        id: String,
        version: u64,
        created_at: u64,
        model: GoalModel,
        schema: ContextSchema,
        catalogue: SpannedCatalogue,
        catalogue_text: String,
    ) -> Result<(Workspace, Vec<Diagnostic>), Diagnostics> {
        let bound = bind_spanned(&catalogue, &model, &schema)?;
        let warnings = bind_warnings(&catalogue, &bound);
        Ok((
            Workspace {
                id,
                version,
                created_at,
                model,
                schema,
                catalogue,
                catalogue_text,
                bound,
            },
            warnings,
        ))
    }

    /// Parses and validates the three texts and stores a new workspace.
    /// All diagnostics from every text are reported together.
    pub fn create(
        &self,
        id: Option<String>,
        model: &str,
        schema: &str,
        catalogue: &str,
    ) -> Result<(Arc<Workspace>, Vec<Diagnostic>), Diagnostics> {
        let m = parse_goal_model("model.gm", model);
        let s = parse_context_schema("schema.ctx", schema);
        let c = parse_catalogue_spanned("catalogue.prefs", catalogue);
        let (m, s, c) = match (m, s, c) {
            (Ok(m), Ok(s), Ok(c)) => (m, s, c),
            (m, s, c) => {
                let mut all = Vec::new();
                for e in [m.err(), s.err(), c.err()].into_iter().flatten() {
                    all.extend(e.0);
                }
                return Err(Diagnostics(all));
            }
        };
        let id = id.unwrap_or_else(|| format!("ws{}", self.next_id.fetch_add(1, Ordering::Relaxed) + 1));
        let (ws, warnings) = Self::build(id.clone(), 1, now(), m, s, c, catalogue.to_string())?;
        let ws = Arc::new(ws);
        self.workspaces.write().expect("store lock").insert(id, ws.clone());
        Ok((ws, warnings))
    }

    pub fn insert_fixture(&self, fixture: Fixture, catalogue_text: String) -> Result<Arc<Workspace>, Diagnostics> {
        let (ws, _) = Self::build(
            fixture.name.clone(),
            1,
            now(),
            fixture.model,
            fixture.schema,
            fixture.catalogue,
            catalogue_text,
        )?;
        let ws = Arc::new(ws);
        self.workspaces
            .write()
            .expect("store lock")
            .insert(fixture.name, ws.clone());
        Ok(ws)
    }

    /// Loads every subdirectory of `dir` that holds `model.gm`,
    /// `schema.ctx` and `catalogue.prefs`, keyed by directory name.
    pub fn load_fixtures(&self, dir: &Path) -> Result<Vec<String>, LoadError> {
        let entries = std::fs::read_dir(dir).map_err(|source| LoadError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut dirs: Vec<_> = entries
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| ["model.gm", "schema.ctx", "catalogue.prefs"].iter().all(|f| p.join(f).is_file()))
            .collect();
        dirs.sort();
        let mut loaded = Vec::new();
        for d in dirs {
            let fixture = Fixture::load_dir(&d)?;
            let text = std::fs::read_to_string(d.join("catalogue.prefs")).map_err(|source| LoadError::Io {
                path: d.join("catalogue.prefs"),
                source,
            })?;
            loaded.push(fixture.name.clone());
            self.insert_fixture(fixture, text)?;
        }
        Ok(loaded)
    }

    /// Replaces a workspace's catalogue. The new text is validated outside
    /// the lock and swapped in only if no other edit landed meanwhile; on
    /// any failure the workspace is left as it was.
    pub fn replace_catalogue(
        &self,
        id: &str,
        text: &str,
        expected: Option<u64>,
    ) -> Result<(Arc<Workspace>, Vec<Diagnostic>), ApiError> {
        let catalogue = parse_catalogue_spanned("catalogue.prefs", text)?;
        loop {
            let base = self.get(id).ok_or_else(|| ApiError::NotFound(id.into()))?;
            if let Some(v) = expected {
                if v != base.version {
                    return Err(ApiError::Conflict { current: base.version });
                }
            }
            let (ws, warnings) = Self::build(
                base.id.clone(),
                base.version + 1,
                base.created_at,
                base.model.clone(),
                base.schema.clone(),
                catalogue.clone(),
                text.to_string(),
            )?;
            let mut guard = self.workspaces.write().expect("store lock");
            match guard.get(id) {
                None => return Err(ApiError::NotFound(id.into())),
                Some(cur) if cur.version != base.version => continue,
                Some(_) => {
                    let ws = Arc::new(ws);
                    guard.insert(id.to_string(), ws.clone());
                    return Ok((ws, warnings));
                }
            }
        }
    }
}

type Shared = Arc<Store>;

fn if_match(headers: &HeaderMap) -> Result<Option<u64>, ApiError> {
    let Some(raw) = headers.get(header::IF_MATCH) else {
        return Ok(None);
    };
    raw.to_str()
        .ok()
        .map(|s| s.trim().trim_matches('"'))
        .and_then(|s| s.parse().ok())
        .map(Some)
        .ok_or_else(|| ApiError::BadRequest("If-Match must be a workspace version number".into()))
}

fn workspace(store: &Store, id: &str, headers: &HeaderMap) -> Result<Arc<Workspace>, ApiError> {
    let ws = store.get(id).ok_or_else(|| ApiError::NotFound(id.into()))?;
    match if_match(headers)? {
        Some(v) if v != ws.version => Err(ApiError::Conflict { current: ws.version }),
        _ => Ok(ws),
    }
}

fn ok(ws: &Workspace, status: StatusCode, body: Value) -> Response {
    let mut resp = (status, Json(body)).into_response();
    resp.headers_mut().insert(
        HeaderName::from_static(VERSION_HEADER),
        HeaderValue::from(ws.version),
    );
    resp
}

fn summary(ws: &Workspace) -> Value {
    json!({
        "id": ws.id,
        "version": ws.version,
        "created_at": ws.created_at,
        "root": ws.model.root().as_str(),
        "hardgoals": ws.model.hardgoal_count(),
        "softgoals": ws.model.softgoals().count(),
        "preferences": ws.catalogue.catalogue.len(),
    })
}

#[derive(Deserialize)]
struct CreateBody {
    model: String,
    schema: String,
    catalogue: String,
}

async fn create(State(store): State<Shared>, Json(body): Json<CreateBody>) -> Result<Response, ApiError> {
    let (ws, warnings) = store.create(None, &body.model, &body.schema, &body.catalogue)?;
    let mut value = summary(&ws);
    value["diagnostics"] = diags_json(&warnings);
    Ok(ok(&ws, StatusCode::CREATED, value))
}

async fn list(State(store): State<Shared>) -> Json<Value> {
    let items: Vec<Value> = store.ids().iter().filter_map(|id| store.get(id)).map(|w| summary(&w)).collect();
    Json(json!({ "workspaces": items }))
}

async fn show(State(store): State<Shared>, UrlPath(id): UrlPath<String>, headers: HeaderMap) -> Result<Response, ApiError> {
    let ws = workspace(&store, &id, &headers)?;
    let mut value = summary(&ws);
    value["catalogue"] = Value::from(ws.catalogue_text.as_str());
    value["warnings"] = diags_json(&bind_warnings(&ws.catalogue, &ws.bound));
    Ok(ok(&ws, StatusCode::OK, value))
}

async fn schema(State(store): State<Shared>, UrlPath(id): UrlPath<String>, headers: HeaderMap) -> Result<Response, ApiError> {
    let ws = workspace(&store, &id, &headers)?;
    let elements: Vec<Value> = ws
        .schema
        .elements()
        .iter()
        .map(|e| json!({"name": e.name, "values": e.domain}))
        .collect();
    Ok(ok(&ws, StatusCode::OK, json!({"id": ws.id, "version": ws.version, "elements": elements})))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CatalogueBody {
    Wrapped { catalogue: String },
    Raw(String),
}

async fn put_catalogue(
    State(store): State<Shared>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    body: String,
) -> Result<Response, ApiError> {
    let is_json = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("application/json"));
    let text = if is_json {
        match serde_json::from_str::<CatalogueBody>(&body) {
            Ok(CatalogueBody::Wrapped { catalogue }) | Ok(CatalogueBody::Raw(catalogue)) => catalogue,
            Err(e) => return Err(ApiError::BadRequest(format!("invalid JSON body: {e}"))),
        }
    } else {
        body
    };
    let expected = if_match(&headers)?;
    let (ws, warnings) = store.replace_catalogue(&id, &text, expected)?;
    Ok(ok(
        &ws,
        StatusCode::OK,
        json!({"id": ws.id, "version": ws.version, "diagnostics": diags_json(&warnings)}),
    ))
}

fn default_mode() -> String {
    std::env::var("GOALRANK_MODE").unwrap_or_else(|_| ScoringMode::default().name().to_string())
}

fn parse_mode(mode: Option<&str>) -> Result<ScoringMode, ApiError> {
    let m = mode.map_or_else(default_mode, str::to_string);
    m.parse().map_err(|e: goalrank_core::UnknownMode| ApiError::Unprocessable(e.to_string()))
}

/// Builds a situation from a JSON object, one `elem=value` line per entry
/// so that diagnostics point at the offending entry.
fn situation_of(schema: &ContextSchema, label: &str, values: &BTreeMap<String, String>) -> Result<Situation, ApiError> {
    let text: String = values.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
    Ok(parse_situation(label, &text, schema)?)
}

fn ranked(ws: &Workspace, situation: &Situation, mode: ScoringMode, top: Option<usize>) -> Result<RankingReport, ApiError> {
    let mut report = rank_bound(&ws.model, &ws.bound, situation, mode, DEFAULT_SOLUTION_CAP)?;
    if let Some(n) = top {
        report.solutions.truncate(n);
    }
    Ok(report)
}

#[derive(Deserialize)]
struct RankBody {
    situation: BTreeMap<String, String>,
    mode: Option<String>,
    top: Option<usize>,
}

async fn rank(
    State(store): State<Shared>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    Json(body): Json<RankBody>,
) -> Result<Response, ApiError> {
    let ws = workspace(&store, &id, &headers)?;
    let mode = parse_mode(body.mode.as_deref())?;
    let situation = situation_of(&ws.schema, "situation", &body.situation)?;
    let ws2 = ws.clone();
    let report = tokio::task::spawn_blocking(move || ranked(&ws2, &situation, mode, body.top))
        .await
        .map_err(|e| ApiError::Unprocessable(e.to_string()))??;
    let mut value = ranking_doc(&report).to_json();
    value["id"] = Value::from(ws.id.as_str());
    value["version"] = Value::from(ws.version);
    Ok(ok(&ws, StatusCode::OK, value))
}

#[derive(Deserialize)]
struct CompareBody {
    left: BTreeMap<String, String>,
    right: BTreeMap<String, String>,
    mode: Option<String>,
    top: Option<usize>,
}

/// Per-solution psd differences (`left - right`) in canonical solution
/// order, with each side's rank.
pub fn compare_reports(left: &RankingReport, right: &RankingReport) -> Value {
    let index = |r: &RankingReport| {
        r.solutions
            .iter()
            .enumerate()
            .map(|(i, s)| (s.solution.clone(), (i + 1, s.psd)))
            .collect::<BTreeMap<_, _>>()
    };
    let (l, r) = (index(left), index(right));
    let mut keys: Vec<_> = l.keys().chain(r.keys()).cloned().collect();
    keys.sort();
    keys.dedup();
    let rows: Vec<Value> = keys
        .iter()
        .map(|sol| {
            let a = l.get(sol);
            let b = r.get(sol);
            let fmt = |v: goalrank_core::Rational| Value::from(goalrank_core::format_rational(&v));
            json!({
                "tasks": sol.tasks.iter().map(|t| t.as_str()).collect::<Vec<_>>(),
                "left_rank": a.map(|x| x.0),
                "right_rank": b.map(|x| x.0),
                "left_psd": a.map(|x| fmt(x.1)),
                "right_psd": b.map(|x| fmt(x.1)),
                "delta": match (a, b) { (Some(x), Some(y)) => fmt(x.1 - y.1), _ => Value::Null },
            })
        })
        .collect();
    Value::Array(rows)
}

async fn compare(
    State(store): State<Shared>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    Json(body): Json<CompareBody>,
) -> Result<Response, ApiError> {
    let ws = workspace(&store, &id, &headers)?;
    let mode = parse_mode(body.mode.as_deref())?;
    let left = situation_of(&ws.schema, "left", &body.left);
    let right = situation_of(&ws.schema, "right", &body.right);
    let (left, right) = match (left, right) {
        (Ok(l), Ok(r)) => (l, r),
        (l, r) => {
            let mut all = Vec::new();
            for e in [l.err(), r.err()].into_iter().flatten() {
                match e {
                    ApiError::Invalid(ds) => all.extend(ds),
                    other => return Err(other),
                }
            }
            return Err(ApiError::Invalid(all));
        }
    };
    let ws2 = ws.clone();
    let (lr, rr) = tokio::task::spawn_blocking(move || {
        Ok::<_, ApiError>((ranked(&ws2, &left, mode, None)?, ranked(&ws2, &right, mode, None)?))
    })
    .await
    .map_err(|e| ApiError::Unprocessable(e.to_string()))??;
    let delta = compare_reports(&lr, &rr);
    let shown = |mut r: RankingReport| {
        if let Some(n) = body.top {
            r.solutions.truncate(n);
        }
        ranking_doc(&r).to_json()
    };
    Ok(ok(
        &ws,
        StatusCode::OK,
        json!({"id": ws.id, "version": ws.version, "left": shown(lr), "right": shown(rr), "delta": delta}),
    ))
}

pub fn router(store: Shared) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods(Any)
        .allow_headers(Any)
        .expose_headers([HeaderName::from_static(VERSION_HEADER)]);
    Router::new()
        .route("/workspaces", post(create).get(list))
        .route("/workspaces/{id}", get(show))
        .route("/workspaces/{id}/schema", get(schema))
        .route("/workspaces/{id}/rank", post(rank))
        .route("/workspaces/{id}/catalogue", put(put_catalogue))
        .route("/workspaces/{id}/compare", post(compare))
        .layer(cors)
        .with_state(store)
}

/// Serves `store` until the process is stopped.
pub async fn serve(listener: tokio::net::TcpListener, store: Shared) -> std::io::Result<()> {
    axum::serve(listener, router(store)).await
}
