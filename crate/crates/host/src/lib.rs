//! HTTP host for a generated web plugin tree.
//!
//! One binary serves any panel-* tree: the spec and host-config are read
//! from the plugin directory, runs go through the presenter engine and each
//! run gets its own session directory under `sessions_root`.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard, PoisonError, RwLock};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use guigen_core::codegen::HOST_CONFIG_FILE;
use guigen_core::presenter::{
    begin_update, build_command, execute, execute_post, is_contained, resolve_within, ArtifactManifest, CommandPlan,
    EngineHint, PostJob, PresenterError, RunConfig, RunSession, SessionState, WidgetState, POST_DIR,
};
use guigen_core::spec::{self, GuiSpec, SpecError};
use serde::Deserialize;
use serde_json::json;
use thiserror::Error;

const INDEX_HTML: &str = include_str!("../assets/index.html");
const VIEWER_HTML: &str = include_str!("../assets/viewer.html");

#[derive(Debug, Error)]
pub enum HostError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bad host-config: {0}")]
    BadHostConfig(String),
    #[error("spec {}: {source}", path.display())]
    Spec { path: PathBuf, source: SpecError },
}

#[derive(Debug, Deserialize)]
struct HostConfigFile {
    engine_hint: EngineHint,
    spec_file: Option<String>,
}

#[derive(Debug, Clone)]
pub struct HostConfig {
    pub listen: SocketAddr,
    pub plugin_dir: PathBuf,
    pub sessions_root: PathBuf,
    pub engine_hint: EngineHint,
    /// Directory holding `index.html` and `assets/`. The built-in page is
    /// served when unset.
    pub frontend_dir: Option<PathBuf>,
    pub run: RunConfig,
    spec_path: PathBuf,
}

impl HostConfig {
    /// Read `host-config.json` from a generated web tree and locate its spec.
    /// A relative post-analysis script from the spec is looked up in the
    /// plugin directory unless `run.post_script` is set.
    pub fn load(
        plugin_dir: impl Into<PathBuf>,
        sessions_root: impl Into<PathBuf>,
        mut run: RunConfig,
    ) -> Result<(Self, LoadedSpec), HostError> {
        let plugin_dir = plugin_dir.into();
        let cfg_path = plugin_dir.join(HOST_CONFIG_FILE);
        let text = read(&cfg_path)?;
        let file: HostConfigFile =
            serde_json::from_slice(&text).map_err(|e| HostError::BadHostConfig(format!("{}: {e}", cfg_path.display())))?;
        let spec_path = match file.spec_file {
            Some(name) if is_contained(&name) => plugin_dir.join(name),
            Some(name) => return Err(HostError::BadHostConfig(format!("spec_file `{name}` leaves the plugin directory"))),
            None => find_spec(&plugin_dir)?,
        };
        let loaded = LoadedSpec::read(&spec_path)?;
        if run.post_script.is_none() {
            let local = plugin_dir.join(&loaded.spec.meta.post_script);
            if local.is_file() {
                run.post_script = Some(local);
            }
        }
        let cfg = Self {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            plugin_dir,
            sessions_root: sessions_root.into(),
            engine_hint: file.engine_hint,
            frontend_dir: None,
            run,
            spec_path,
        };
        Ok((cfg, loaded))
    }

    pub fn spec_path(&self) -> &Path {
        &self.spec_path
    }
}

fn read(path: &Path) -> Result<Vec<u8>, HostError> {
    std::fs::read(path).map_err(|source| HostError::Io {
        path: path.to_owned(),
        source,
    })
}

fn find_spec(dir: &Path) -> Result<PathBuf, HostError> {
    let entries = std::fs::read_dir(dir).map_err(|source| HostError::Io {
        path: dir.to_owned(),
        source,
    })?;
    let mut found: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.to_str().is_some_and(|s| s.ends_with(".spec.json")))
        .collect();
    match found.len() {
        1 => Ok(found.remove(0)),
        n => Err(HostError::BadHostConfig(format!(
            "no spec_file given and {n} *.spec.json files in {}",
            dir.display()
        ))),
    }
}

/// The spec as parsed, plus its exact bytes for `/api/spec`.
#[derive(Debug, Clone)]
pub struct LoadedSpec {
    pub spec: GuiSpec,
    pub bytes: Bytes,
}

impl LoadedSpec {
    pub fn read(path: &Path) -> Result<Self, HostError> {
        let bytes = read(path)?;
        let text = String::from_utf8_lossy(&bytes);
        let spec = spec::from_json(&text).map_err(|source| HostError::Spec {
            path: path.to_owned(),
            source,
        })?;
        Ok(Self {
            spec,
            bytes: Bytes::from(bytes),
        })
    }
}

type Slot = Arc<Mutex<RunSession>>;

struct App {
    cfg: HostConfig,
    spec: LoadedSpec,
    sessions: RwLock<HashMap<String, Slot>>,
}

fn lock(slot: &Slot) -> MutexGuard<'_, RunSession> {
    slot.lock().unwrap_or_else(PoisonError::into_inner)
}

impl App {
    fn session(&self, id: &str) -> Option<Slot> {
        self.sessions.read().unwrap_or_else(PoisonError::into_inner).get(id).cloned()
    }

    fn insert(&self, session: RunSession) -> Slot {
        let id = session.id().to_owned();
        let slot = Arc::new(Mutex::new(session));
        self.sessions
            .write()
            .unwrap_or_else(PoisonError::into_inner)
            .insert(id, slot.clone());
        slot
    }

    /// Executable then post-analysis, locking the session only for transitions.
    fn drive(&self, slot: &Slot, plan: &CommandPlan, exe: &Path) {
        let result = execute(plan, exe, self.cfg.run.timeout);
        let job = {
            let mut s = lock(slot);
            if s.finish_run(result).is_err() || s.state() != SessionState::PostAnalysis {
                return;
            }
            match s.begin_post() {
                Ok(job) => job,
                Err(_) => return,
            }
        };
        let result = self.post(&job);
        let _ = lock(slot).finish_post(result);
    }

    fn post(&self, job: &PostJob) -> Result<ArtifactManifest, PresenterError> {
        let spec = &self.spec.spec;
        self.cfg
            .run
            .post_program(spec)
            .and_then(|program| execute_post(spec, job, &program, self.cfg.run.post_timeout))
    }
}

/// JSON error body with a status code.
struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

fn not_found(what: impl Into<String>) -> ApiError {
    ApiError(StatusCode::NOT_FOUND, what.into())
}

fn bad_request(e: impl ToString) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, e.to_string())
}

pub fn router(cfg: HostConfig, spec: LoadedSpec) -> Router {
    let app = Arc::new(App {
        cfg,
        spec,
        sessions: RwLock::new(HashMap::new()),
    });
    Router::new()
        .route("/api/spec", get(get_spec))
        .route("/api/run", post(post_run))
        .route("/api/session/{id}", get(get_session))
        .route("/api/update", post(post_update))
        .route("/artifacts/{session}/{*path}", get(get_artifact))
        .route("/", get(get_index))
        .route("/assets/{*path}", get(get_asset))
        .route("/viewer/", get(get_viewer))
        .with_state(app)
}

/// Bind `cfg.listen` and serve until the process is stopped.
pub async fn serve(cfg: HostConfig, spec: LoadedSpec) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(cfg.listen).await?;
    serve_on(listener, cfg, spec).await
}

pub async fn serve_on(listener: tokio::net::TcpListener, cfg: HostConfig, spec: LoadedSpec) -> std::io::Result<()> {
    std::fs::create_dir_all(&cfg.sessions_root)?;
    axum::serve(listener, router(cfg, spec)).await
}

async fn get_spec(State(app): State<Arc<App>>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], app.spec.bytes.clone()).into_response()
}

async fn post_run(State(app): State<Arc<App>>, body: Bytes) -> Result<Response, ApiError> {
    let state: WidgetState = serde_json::from_slice(&body).map_err(bad_request)?;
    let spec = &app.spec.spec;
    let plan = build_command(spec, &state).map_err(bad_request)?;
    let mut session = RunSession::create(&app.cfg.sessions_root, spec)
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    let plan = session.begin_run(plan).map_err(|e| ApiError(StatusCode::CONFLICT, e.to_string()))?;
    let id = session.id().to_owned();
    match app.cfg.run.exe_program(spec) {
        Err(e) => {
            let _ = session.finish_run(Err(e.clone()));
            app.insert(session);
            let body = json!({ "session_id": id, "error": e.to_string() });
            Ok((StatusCode::INTERNAL_SERVER_ERROR, Json(body)).into_response())
        }
        Ok(exe) => {
            let slot = app.insert(session);
            let worker = app.clone();
            tokio::task::spawn_blocking(move || worker.drive(&slot, &plan, &exe));
            Ok(Json(json!({ "session_id": id })).into_response())
        }
    }
}

async fn get_session(State(app): State<Arc<App>>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    let slot = app.session(&id).ok_or_else(|| not_found(format!("unknown session `{id}`")))?;
    let status = lock(&slot).status();
    Ok(Json(status).into_response())
}

#[derive(Debug, Deserialize)]
struct UpdateRequest {
    session_id: String,
    #[serde(default)]
    values: BTreeMap<String, String>,
}

async fn post_update(State(app): State<Arc<App>>, body: Bytes) -> Result<Response, ApiError> {
    let req: UpdateRequest = serde_json::from_slice(&body).map_err(bad_request)?;
    let slot = app
        .session(&req.session_id)
        .ok_or_else(|| not_found(format!("unknown session `{}`", req.session_id)))?;
    let (refresh, job) = begin_update(&app.spec.spec, &mut lock(&slot), &req.values).map_err(|e| match e {
        PresenterError::NotReady(_) => ApiError(StatusCode::CONFLICT, e.to_string()),
        e => bad_request(e),
    })?;
    let worker = app.clone();
    let finished = tokio::task::spawn_blocking(move || {
        let result = worker.post(&job);
        lock(&slot).finish_post(result)
    })
    .await
    .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    match finished {
        Ok(manifest) => Ok(Json(json!({ "refresh": refresh, "manifest": manifest })).into_response()),
        Err(e) => Err(ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())),
    }
}

/// Session ids are 32 lowercase hex digits.
fn valid_session_id(id: &str) -> bool {
    id.len() == 32 && id.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

fn file_response(path: &Path) -> Result<Response, ApiError> {
    let bytes = std::fs::read(path).map_err(|_| not_found(path.display().to_string()))?;
    let mime = mime_guess::from_path(path).first_or_octet_stream();
    Ok(([(header::CONTENT_TYPE, mime.to_string())], bytes).into_response())
}

/// Artifacts come from the session's post-analysis directory. Sessions not
/// in memory (for example after a restart) are still served from disk.
async fn get_artifact(
    State(app): State<Arc<App>>,
    UrlPath((session, path)): UrlPath<(String, String)>,
) -> Result<Response, ApiError> {
    let out_dir = match app.session(&session) {
        Some(slot) => lock(&slot).out_dir(),
        None if valid_session_id(&session) => app.cfg.sessions_root.join(&session).join(POST_DIR),
        None => return Err(not_found(format!("unknown session `{session}`"))),
    };
    let file = resolve_within(&out_dir, &path)
        .filter(|p| p.is_file())
        .ok_or_else(|| not_found(format!("no artifact `{path}`")))?;
    file_response(&file)
}

async fn get_index(State(app): State<Arc<App>>) -> Result<Response, ApiError> {
    match &app.cfg.frontend_dir {
        Some(dir) => file_response(&dir.join("index.html")),
        None => Ok(Html(INDEX_HTML).into_response()),
    }
}

async fn get_asset(State(app): State<Arc<App>>, UrlPath(path): UrlPath<String>) -> Result<Response, ApiError> {
    let dir = app.cfg.frontend_dir.as_ref().ok_or_else(|| not_found("no frontend directory"))?;
    let file = resolve_within(&dir.join("assets"), &path)
        .filter(|p| p.is_file())
        .ok_or_else(|| not_found(format!("no asset `{path}`")))?;
    file_response(&file)
}

async fn get_viewer(State(app): State<Arc<App>>) -> Html<String> {
    Html(VIEWER_HTML.replace("{{ENGINE_HINT}}", app.cfg.engine_hint.as_str()))
}
