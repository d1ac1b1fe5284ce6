//! Backend-neutral model and presenter logic: widget state, argv
//! construction, the run lifecycle, post-analysis and selective refresh.

pub mod manifest;
pub mod process;
mod session;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flags::{FlagKind, FlagSpec, RefreshTarget};
use crate::spec::GuiSpec;
pub use manifest::{
    is_contained, resolve_within, ArtifactManifest, EngineHint, ManifestCode, ManifestViolation, SlotArtifact, ViewerArtifact,
};
pub use process::{ExecOutcome, STDERR_TAIL_BYTES};
pub use session::{execute, execute_post, PostJob, RunSession, SessionState, SessionStatus, EXE_STDOUT, POST_DIR};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(600);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PresenterError {
    #[error("widget `{0}` is not bound to a flag")]
    UnknownWidget(String),
    #[error("widget `{widget}` expects {expected}")]
    StateTypeMismatch { widget: String, expected: &'static str },
    #[error("required file for {token} (widget `{widget}`) is empty")]
    MissingRequiredFile { token: String, widget: String },
    #[error("executable not found: {0}")]
    ExeNotFound(String),
    #[error("cannot start process: {0}")]
    SpawnFailure(String),
    #[error("process exceeded the {}s timeout", .0.as_secs_f64())]
    Timeout(Duration),
    #[error("post-analysis exited with {}", fmt_exit(.exit_code))]
    PostScriptFailure { exit_code: Option<i32>, stderr_tail: String },
    #[error("post-analysis wrote no manifest at {0}")]
    ManifestMissing(String),
    #[error("invalid manifest: {}", join(.0))]
    ManifestInvalid(Vec<ManifestViolation>),
    #[error("session is {0}, not Ready")]
    NotReady(SessionState),
    #[error("illegal transition {from} -> {to}")]
    IllegalTransition { from: SessionState, to: SessionState },
    #[error("`{0}` is not an update flag")]
    UnknownUpdateFlag(String),
    #[error("value `{value}` does not fit update flag {token}")]
    UpdateValueMismatch { token: String, value: String },
    #[error("i/o error: {0}")]
    Io(String),
}

fn fmt_exit(code: &Option<i32>) -> String {
    match code {
        Some(c) => format!("status {c}"),
        None => "a signal".into(),
    }
}

fn join(v: &[ManifestViolation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl PresenterError {
    /// Errors raised while running post-analysis rather than the executable.
    pub fn is_post_analysis(&self) -> bool {
        matches!(
            self,
            Self::PostScriptFailure { .. } | Self::ManifestMissing(_) | Self::ManifestInvalid(_)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WidgetValue {
    Bool(bool),
    Text(String),
}

impl From<bool> for WidgetValue {
    fn from(b: bool) -> Self {
        Self::Bool(b)
    }
}

impl From<&str> for WidgetValue {
    fn from(s: &str) -> Self {
        Self::Text(s.to_owned())
    }
}

impl From<String> for WidgetValue {
    fn from(s: String) -> Self {
        Self::Text(s)
    }
}

/// Current values of the flag-bound input widgets, keyed by widget id.
/// Absent keys read as unchecked / empty.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WidgetState(pub BTreeMap<String, WidgetValue>);

impl WidgetState {
    pub fn new() -> Self {
        Self::default()
    }

    /// State as a freshly opened view shows it: every widget at its default.
    pub fn from_defaults(spec: &GuiSpec) -> Self {
        let mut s = Self::new();
        for b in &spec.flags {
            let v = match b.flag.kind {
                FlagKind::Bool => WidgetValue::Bool(b.flag.default == "true"),
                _ => WidgetValue::Text(b.flag.default.clone()),
            };
            s.0.insert(b.widget_id.clone(), v);
        }
        s
    }

    pub fn set(&mut self, widget_id: impl Into<String>, value: impl Into<WidgetValue>) -> &mut Self {
        self.0.insert(widget_id.into(), value.into());
        self
    }

    pub fn get(&self, widget_id: &str) -> Option<&WidgetValue> {
        self.0.get(widget_id)
    }

    /// Check keys and value types against the spec. Unknown keys are
    /// reported first, then type errors in spec order.
    pub fn check(&self, spec: &GuiSpec) -> Result<(), PresenterError> {
        if let Some(id) = self.0.keys().find(|id| spec.flag_for_widget(id).is_none()) {
            return Err(PresenterError::UnknownWidget(id.clone()));
        }
        for binding in &spec.flags {
            let Some(value) = self.0.get(&binding.widget_id) else {
                continue;
            };
            let mismatch = |expected| PresenterError::StateTypeMismatch {
                widget: binding.widget_id.clone(),
                expected,
            };
            match (binding.flag.kind, value) {
                (FlagKind::Bool, WidgetValue::Bool(_)) => {}
                (FlagKind::Bool, _) => return Err(mismatch("a boolean")),
                (_, WidgetValue::Bool(_)) => return Err(mismatch("text")),
                (_, WidgetValue::Text(t)) => {
                    if !text_fits(&binding.flag, t.trim()) {
                        return Err(mismatch(match binding.flag.kind {
                            FlagKind::Int => "integer text",
                            FlagKind::Float => "decimal text",
                            _ => "one of the enumerated choices",
                        }));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Whether trimmed text `t` is an acceptable value for a valued flag.
fn text_fits(flag: &FlagSpec, t: &str) -> bool {
    t.is_empty()
        || match flag.kind {
            FlagKind::Int => t.parse::<i64>().is_ok(),
            FlagKind::Float => crate::flags::is_finite_decimal(t),
            FlagKind::Enum => flag.choices.iter().any(|c| c == t),
            FlagKind::Bool => matches!(t, "true" | "false"),
            FlagKind::String | FlagKind::Infile => true,
        }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandPlan {
    pub argv: Vec<String>,
    pub workdir: PathBuf,
}

/// Tokens one flag contributes given its widget value.
fn contribution(flag: &FlagSpec, value: Option<&WidgetValue>, out: &mut Vec<String>) {
    match value {
        Some(WidgetValue::Bool(true)) => out.push(flag.token.clone()),
        Some(WidgetValue::Text(t)) if !t.trim().is_empty() => {
            out.push(flag.token.clone());
            out.push(t.trim().to_owned());
        }
        _ => {}
    }
}

/// Turn widget state into the executable's argv. The workdir is left empty;
/// a session binds it to its run directory.
pub fn build_command(spec: &GuiSpec, state: &WidgetState) -> Result<CommandPlan, PresenterError> {
    state.check(spec)?;
    let mut argv = vec![spec.meta.exe.clone()];
    for b in &spec.flags {
        let value = state.get(&b.widget_id);
        if b.flag.is_required_file() && !matches!(value, Some(WidgetValue::Text(t)) if !t.trim().is_empty()) {
            return Err(PresenterError::MissingRequiredFile {
                token: b.flag.token.clone(),
                widget: b.widget_id.clone(),
            });
        }
        contribution(&b.flag, value, &mut argv);
    }
    Ok(CommandPlan {
        argv,
        workdir: PathBuf::new(),
    })
}

/// Post-analysis arguments: fixed directory options, then update flags in
/// spec order under the same contribution rules as `build_command`.
pub fn post_args(spec: &GuiSpec, run_dir: &Path, out_dir: &Path, values: &BTreeMap<String, String>) -> Vec<String> {
    let mut args = vec![
        "--run-dir".to_owned(),
        run_dir.display().to_string(),
        "--out-dir".to_owned(),
        out_dir.display().to_string(),
    ];
    for b in &spec.update_flags {
        let value = values.get(&b.flag.token).map(|v| match b.flag.kind {
            FlagKind::Bool => WidgetValue::Bool(v.trim() == "true"),
            _ => WidgetValue::Text(v.clone()),
        });
        contribution(&b.flag, value.as_ref(), &mut args);
    }
    args
}

/// Programs and limits for running a spec. Unset programs are resolved from
/// the spec's meta block.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub exe: Option<PathBuf>,
    pub post_script: Option<PathBuf>,
    pub timeout: Duration,
    pub post_timeout: Duration,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            exe: None,
            post_script: None,
            timeout: DEFAULT_TIMEOUT,
            post_timeout: DEFAULT_TIMEOUT,
        }
    }
}

impl RunConfig {
    pub fn with_programs(exe: impl Into<PathBuf>, post_script: impl Into<PathBuf>) -> Self {
        Self {
            exe: Some(exe.into()),
            post_script: Some(post_script.into()),
            ..Self::default()
        }
    }

    pub fn exe_program(&self, spec: &GuiSpec) -> Result<PathBuf, PresenterError> {
        match &self.exe {
            Some(p) => existing(p),
            None => process::resolve_program(&spec.meta.exe),
        }
    }

    pub fn post_program(&self, spec: &GuiSpec) -> Result<PathBuf, PresenterError> {
        existing(self.post_script.as_deref().unwrap_or(Path::new(&spec.meta.post_script)))
    }
}

fn existing(p: &Path) -> Result<PathBuf, PresenterError> {
    let abs = std::path::absolute(p).map_err(|e| PresenterError::Io(e.to_string()))?;
    if abs.is_file() {
        Ok(abs)
    } else {
        Err(PresenterError::ExeNotFound(p.display().to_string()))
    }
}

/// Create a session under `session_root`, run the executable and, on
/// success, post-analysis. Post-analysis failures leave the session Failed
/// rather than returning an error.
pub fn start_run(
    spec: &GuiSpec,
    state: &WidgetState,
    session_root: &Path,
    cfg: &RunConfig,
) -> Result<RunSession, PresenterError> {
    build_command(spec, state)?;
    let mut session = RunSession::create(session_root, spec)?;
    match session.launch(spec, state, cfg) {
        Err(e) if !e.is_post_analysis() => Err(e),
        _ => Ok(session),
    }
}

fn check_update_values(spec: &GuiSpec, values: &BTreeMap<String, String>) -> Result<(), PresenterError> {
    for (token, value) in values {
        let b = spec
            .update_flag(token)
            .ok_or_else(|| PresenterError::UnknownUpdateFlag(token.clone()))?;
        if !text_fits(&b.flag, value.trim()) {
            return Err(PresenterError::UpdateValueMismatch {
                token: token.clone(),
                value: value.clone(),
            });
        }
    }
    Ok(())
}

/// Run post-analysis for a session in PostAnalysis or Ready, after merging
/// `update_values` into the session's current update values.
pub fn run_post_analysis(
    spec: &GuiSpec,
    session: &mut RunSession,
    update_values: &BTreeMap<String, String>,
    cfg: &RunConfig,
) -> Result<ArtifactManifest, PresenterError> {
    if !matches!(session.state(), SessionState::PostAnalysis | SessionState::Ready) {
        return Err(PresenterError::NotReady(session.state()));
    }
    check_update_values(spec, update_values)?;
    session.merge_update_values(update_values);
    let job = session.begin_post()?;
    let result = cfg
        .post_program(spec)
        .and_then(|program| execute_post(spec, &job, &program, cfg.post_timeout));
    session.finish_post(result)
}

/// Which parts of a view to redraw after an update.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefreshSet {
    pub targets: BTreeSet<RefreshTarget>,
    pub slots_to_refresh: Vec<String>,
}

impl RefreshSet {
    /// Union of the refresh targets of `changed`, which must all be update
    /// flag tokens.
    pub fn for_changes<'a>(
        spec: &GuiSpec,
        changed: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self, PresenterError> {
        let mut targets = BTreeSet::new();
        for token in changed {
            let b = spec
                .update_flag(token)
                .ok_or_else(|| PresenterError::UnknownUpdateFlag(token.to_owned()))?;
            targets.extend(b.refresh.iter().copied());
        }
        let slots_to_refresh = if targets.contains(&RefreshTarget::Outputs) {
            spec.output_slots().map(|(_, s)| s.slot_name.clone()).collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            targets,
            slots_to_refresh,
        })
    }
}

/// First half of an update: requires Ready, checks and merges `changed`,
/// and moves the session to PostAnalysis. Run the returned job with
/// [`execute_post`] and hand the result to [`RunSession::finish_post`].
pub fn begin_update(
    spec: &GuiSpec,
    session: &mut RunSession,
    changed: &BTreeMap<String, String>,
) -> Result<(RefreshSet, PostJob), PresenterError> {
    if session.state() != SessionState::Ready {
        return Err(PresenterError::NotReady(session.state()));
    }
    let refresh = RefreshSet::for_changes(spec, changed.keys().map(String::as_str))?;
    check_update_values(spec, changed)?;
    session.merge_update_values(changed);
    let job = session.begin_post()?;
    Ok((refresh, job))
}

/// Re-run post-analysis with changed update values. The executable is not
/// re-run and input state is untouched.
pub fn apply_update(
    spec: &GuiSpec,
    session: &mut RunSession,
    changed: &BTreeMap<String, String>,
    cfg: &RunConfig,
) -> Result<RefreshSet, PresenterError> {
    let (refresh, job) = begin_update(spec, session, changed)?;
    let result = cfg
        .post_program(spec)
        .and_then(|program| execute_post(spec, &job, &program, cfg.post_timeout));
    session.finish_post(result)?;
    Ok(refresh)
}
