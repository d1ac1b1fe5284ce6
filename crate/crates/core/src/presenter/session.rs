use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::manifest::{ArtifactManifest, MANIFEST_FILE};
use super::process::{self, ExecOutcome};
use super::{build_command, run_post_analysis, CommandPlan, PresenterError, RunConfig, WidgetState};
use crate::spec::GuiSpec;

/// Sub-directory of a run directory that post-analysis writes into.
pub const POST_DIR: &str = "post";
pub const EXE_STDOUT: &str = "stdout.txt";
pub const POST_STDOUT: &str = "post.stdout.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SessionState {
    Idle,
    Running,
    PostAnalysis,
    Ready,
    Failed,
}

impl SessionState {
    pub const ALL: [SessionState; 5] = [Self::Idle, Self::Running, Self::PostAnalysis, Self::Ready, Self::Failed];

    pub fn can_become(self, to: SessionState) -> bool {
        use SessionState::*;
        matches!(
            (self, to),
            (Idle, Running) | (Running, PostAnalysis) | (Running, Failed) | (PostAnalysis, Ready) | (PostAnalysis, Failed) | (Ready, PostAnalysis)
        )
    }

    pub fn is_busy(self) -> bool {
        matches!(self, Self::Running | Self::PostAnalysis)
    }
}

impl fmt::Display for SessionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Work order for one post-analysis invocation.
#[derive(Debug, Clone)]
pub struct PostJob {
    pub run_dir: PathBuf,
    pub out_dir: PathBuf,
    pub values: BTreeMap<String, String>,
}

/// Serializable view of a session, as reported to clients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionStatus {
    pub state: SessionState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exit_code: Option<i32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<ArtifactManifest>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub stderr_tail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// One execution of the wrapped executable and its post-analysis runs.
///
/// Transitions are serialized by the owner; a session is never shared
/// mutably between threads.
#[derive(Debug, Clone)]
pub struct RunSession {
    id: String,
    state: SessionState,
    run_dir: PathBuf,
    manifest: Option<ArtifactManifest>,
    exit_code: Option<i32>,
    stderr_tail: String,
    wall_time: Option<Duration>,
    error: Option<String>,
    argv: Option<Vec<String>>,
    update_values: BTreeMap<String, String>,
    exe_invocations: u32,
    post_invocations: u32,
}

impl RunSession {
    /// New idle session with a fresh run directory under `session_root`.
    pub fn create(session_root: &Path, spec: &GuiSpec) -> Result<Self, PresenterError> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        Self::with_id(id, session_root, spec)
    }

    pub fn with_id(id: String, session_root: &Path, spec: &GuiSpec) -> Result<Self, PresenterError> {
        let run_dir = session_root.join(&id);
        std::fs::create_dir_all(&run_dir).map_err(|e| PresenterError::Io(format!("{}: {e}", run_dir.display())))?;
        Ok(Self {
            id,
            state: SessionState::Idle,
            run_dir,
            manifest: None,
            exit_code: None,
            stderr_tail: String::new(),
            wall_time: None,
            error: None,
            argv: None,
            update_values: spec
                .update_flags
                .iter()
                .map(|b| (b.flag.token.clone(), b.flag.default.clone()))
                .collect(),
            exe_invocations: 0,
            post_invocations: 0,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }
    pub fn state(&self) -> SessionState {
        self.state
    }
    pub fn run_dir(&self) -> &Path {
        &self.run_dir
    }
    pub fn out_dir(&self) -> PathBuf {
        self.run_dir.join(POST_DIR)
    }
    pub fn manifest(&self) -> Option<&ArtifactManifest> {
        self.manifest.as_ref()
    }
    pub fn exit_code(&self) -> Option<i32> {
        self.exit_code
    }
    pub fn stderr_tail(&self) -> &str {
        &self.stderr_tail
    }
    pub fn wall_time(&self) -> Option<Duration> {
        self.wall_time
    }
    pub fn error(&self) -> Option<&str> {
        self.error.as_deref()
    }
    pub fn argv(&self) -> Option<&[String]> {
        self.argv.as_deref()
    }
    pub fn update_values(&self) -> &BTreeMap<String, String> {
        &self.update_values
    }
    pub fn exe_invocations(&self) -> u32 {
        self.exe_invocations
    }
    pub fn post_invocations(&self) -> u32 {
        self.post_invocations
    }

    pub fn status(&self) -> SessionStatus {
        SessionStatus {
            state: self.state,
            exit_code: self.exit_code,
            manifest: self.manifest.clone(),
            stderr_tail: self.stderr_tail.clone(),
            error: self.error.clone(),
        }
    }

    fn transition(&mut self, to: SessionState) -> Result<(), PresenterError> {
        if self.state.can_become(to) {
            self.state = to;
            Ok(())
        } else {
            Err(PresenterError::IllegalTransition { from: self.state, to })
        }
    }

    fn fail(&mut self, err: PresenterError) -> PresenterError {
        self.error = Some(err.to_string());
        self.state = SessionState::Failed;
        err
    }

    /// Idle → Running. Returns the plan bound to this session's run directory.
    pub fn begin_run(&mut self, plan: CommandPlan) -> Result<CommandPlan, PresenterError> {
        self.transition(SessionState::Running)?;
        self.argv = Some(plan.argv.clone());
        Ok(CommandPlan {
            workdir: self.run_dir.clone(),
            ..plan
        })
    }

    /// Running → PostAnalysis on exit 0, Failed otherwise. Errors are
    /// recorded in the session and returned.
    pub fn finish_run(&mut self, result: Result<ExecOutcome, PresenterError>) -> Result<(), PresenterError> {
        if self.state != SessionState::Running {
            return Err(PresenterError::IllegalTransition {
                from: self.state,
                to: SessionState::PostAnalysis,
            });
        }
        match result {
            Ok(outcome) => {
                self.exe_invocations += 1;
                self.exit_code = outcome.exit_code;
                self.stderr_tail = outcome.stderr_tail;
                self.wall_time = Some(outcome.wall_time);
                if outcome.exit_code == Some(0) {
                    self.transition(SessionState::PostAnalysis)
                } else {
                    self.error = Some(match outcome.exit_code {
                        Some(c) => format!("executable exited with status {c}"),
                        None => "executable terminated by a signal".into(),
                    });
                    self.transition(SessionState::Failed)
                }
            }
            Err(e) => {
                if matches!(e, PresenterError::Timeout(_)) {
                    self.exe_invocations += 1;
                }
                Err(self.fail(e))
            }
        }
    }

    /// Ready → PostAnalysis (or stay in PostAnalysis right after a run).
    pub fn begin_post(&mut self) -> Result<PostJob, PresenterError> {
        match self.state {
            SessionState::PostAnalysis => {}
            SessionState::Ready => self.transition(SessionState::PostAnalysis)?,
            other => return Err(PresenterError::NotReady(other)),
        }
        Ok(PostJob {
            run_dir: self.run_dir.clone(),
            out_dir: self.out_dir(),
            values: self.update_values.clone(),
        })
    }

    /// PostAnalysis → Ready with the new manifest, or Failed. A failed
    /// update keeps the previous manifest.
    pub fn finish_post(
        &mut self,
        result: Result<ArtifactManifest, PresenterError>,
    ) -> Result<ArtifactManifest, PresenterError> {
        if self.state != SessionState::PostAnalysis {
            return Err(PresenterError::IllegalTransition {
                from: self.state,
                to: SessionState::Ready,
            });
        }
        let spawned = !matches!(
            result,
            Err(PresenterError::ExeNotFound(_) | PresenterError::SpawnFailure(_) | PresenterError::Io(_))
        );
        if spawned {
            self.post_invocations += 1;
        }
        match result {
            Ok(manifest) => {
                self.transition(SessionState::Ready)?;
                self.error = None;
                self.manifest = Some(manifest.clone());
                Ok(manifest)
            }
            Err(e) => Err(self.fail(e)),
        }
    }

    /// Merge update values (already checked against the spec).
    pub(crate) fn merge_update_values(&mut self, values: &BTreeMap<String, String>) {
        for (k, v) in values {
            self.update_values.insert(k.clone(), v.clone());
        }
    }

    /// Build, execute and post-process in one call.
    pub fn launch(&mut self, spec: &GuiSpec, state: &WidgetState, cfg: &RunConfig) -> Result<(), PresenterError> {
        let plan = build_command(spec, state)?;
        let plan = self.begin_run(plan)?;
        let result = cfg.exe_program(spec).and_then(|program| execute(&plan, &program, cfg.timeout));
        self.finish_run(result)?;
        if self.state == SessionState::PostAnalysis {
            run_post_analysis(spec, self, &BTreeMap::new(), cfg)?;
        }
        Ok(())
    }
}

/// Run a bound plan; stdout goes to `<workdir>/stdout.txt`.
pub fn execute(plan: &CommandPlan, program: &Path, timeout: Duration) -> Result<ExecOutcome, PresenterError> {
    process::run(program, &plan.argv[1..], &plan.workdir, &plan.workdir.join(EXE_STDOUT), timeout)
}

/// Run the post-analysis script for `job` and load its manifest.
pub fn execute_post(
    spec: &GuiSpec,
    job: &PostJob,
    program: &Path,
    timeout: Duration,
) -> Result<ArtifactManifest, PresenterError> {
    let io = |e: std::io::Error| PresenterError::Io(format!("{}: {e}", job.out_dir.display()));
    std::fs::create_dir_all(&job.out_dir).map_err(io)?;
    match std::fs::remove_file(job.out_dir.join(MANIFEST_FILE)) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => return Err(io(e)),
        _ => {}
    }
    let args = super::post_args(spec, &job.run_dir, &job.out_dir, &job.values);
    let outcome = process::run(program, &args, &job.run_dir, &job.run_dir.join(POST_STDOUT), timeout)?;
    if !outcome.success() {
        return Err(PresenterError::PostScriptFailure {
            exit_code: outcome.exit_code,
            stderr_tail: outcome.stderr_tail,
        });
    }
    ArtifactManifest::load(&job.out_dir, spec)
}
