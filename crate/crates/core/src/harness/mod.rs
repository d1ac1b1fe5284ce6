//! Headless driver: runs scripted interactions against the presenter with
//! fake programs and records what happened.
//!
//! Scripts are JSON lines, one action per line:
//!
//! ```text
//! {"action":"set","widget_id":"flag__verbose","value":true}
//! {"action":"click_run"}
//! {"action":"set_update","token":"--color-by","value":"curvature"}
//! {"action":"apply_update"}
//! {"action":"expect","state":"Ready"}
//! ```

pub mod corpus;
pub mod oracle;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::presenter::{
    apply_update, start_run, ArtifactManifest, RefreshSet, RunConfig, RunSession, SessionState, WidgetState,
    WidgetValue,
};
use crate::spec::GuiSpec;
pub use oracle::{oracle_command, OracleError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case", deny_unknown_fields)]
pub enum Action {
    Set { widget_id: String, value: WidgetValue },
    ClickRun,
    SetUpdate { token: String, value: String },
    ApplyUpdate,
    Expect { state: SessionState },
}

#[derive(Debug, Error, PartialEq)]
pub enum HarnessError {
    #[error("script line {line}: {message}")]
    Script { line: usize, message: String },
}

fn script_error(line: usize, message: impl Into<String>) -> HarnessError {
    HarnessError::Script {
        line,
        message: message.into(),
    }
}

/// Parse a JSON-lines script. Blank lines are skipped; line numbers in
/// errors are 1-based.
pub fn parse_script(text: &str) -> Result<Vec<Action>, HarnessError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| script_error(i + 1, e.to_string())))
        .collect()
}

pub fn script_to_jsonl(actions: &[Action]) -> String {
    actions
        .iter()
        .map(|a| serde_json::to_string(a).expect("actions serialize") + "\n")
        .collect()
}

#[derive(Debug, Clone)]
pub struct HarnessConfig {
    pub run: RunConfig,
    pub session_root: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectOutcome {
    pub step: usize,
    pub expected: SessionState,
    pub actual: SessionState,
}

/// Everything observable from one simulation.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Transcript {
    pub argvs: Vec<Vec<String>>,
    pub exe_invocations: u32,
    pub post_invocations: u32,
    pub manifests: Vec<ArtifactManifest>,
    pub refresh_sets: Vec<RefreshSet>,
    pub errors: Vec<String>,
    pub failed_expectations: Vec<ExpectOutcome>,
    pub final_state: Option<SessionState>,
    pub run_dirs: Vec<PathBuf>,
}

impl Transcript {
    /// Final session state, `Idle` when no run was started.
    pub fn state(&self) -> SessionState {
        self.final_state.unwrap_or(SessionState::Idle)
    }

    pub fn is_empty(&self) -> bool {
        self.argvs.is_empty() && self.manifests.is_empty() && self.refresh_sets.is_empty() && self.errors.is_empty()
    }
}

fn check_references(spec: &GuiSpec, actions: &[Action]) -> Result<(), HarnessError> {
    for (i, action) in actions.iter().enumerate() {
        match action {
            Action::Set { widget_id, .. } if spec.flag_for_widget(widget_id).is_none() => {
                return Err(script_error(i + 1, format!("unknown input widget `{widget_id}`")))
            }
            Action::SetUpdate { token, .. } if spec.update_flag(token).is_none() => {
                return Err(script_error(i + 1, format!("unknown update flag `{token}`")))
            }
            _ => {}
        }
    }
    Ok(())
}

/// Run `actions` against the presenter. Presenter errors are recorded in the
/// transcript; only malformed scripts fail.
pub fn simulate(spec: &GuiSpec, actions: &[Action], cfg: &HarnessConfig) -> Result<Transcript, HarnessError> {
    check_references(spec, actions)?;
    let mut t = Transcript::default();
    let mut state = WidgetState::new();
    let mut pending: BTreeMap<String, String> = BTreeMap::new();
    let mut session: Option<RunSession> = None;
    let tally = |t: &mut Transcript, s: &RunSession| {
        t.exe_invocations += s.exe_invocations();
        t.post_invocations += s.post_invocations();
    };

    for (i, action) in actions.iter().enumerate() {
        match action {
            Action::Set { widget_id, value } => {
                state.set(widget_id.clone(), value.clone());
            }
            Action::ClickRun => {
                if let Some(old) = session.take() {
                    tally(&mut t, &old);
                }
                match start_run(spec, &state, &cfg.session_root, &cfg.run) {
                    Ok(s) => {
                        t.argvs.extend(s.argv().map(<[String]>::to_vec));
                        t.run_dirs.push(s.run_dir().to_path_buf());
                        t.manifests.extend(s.manifest().cloned());
                        if let Some(e) = s.error() {
                            t.errors.push(e.to_owned());
                        }
                        session = Some(s);
                    }
                    Err(e) => t.errors.push(e.to_string()),
                }
            }
            Action::SetUpdate { token, value } => {
                pending.insert(token.clone(), value.clone());
            }
            Action::ApplyUpdate => {
                let changed = std::mem::take(&mut pending);
                let Some(s) = session.as_mut() else {
                    t.errors.push(format!("no session: {}", SessionState::Idle));
                    continue;
                };
                match apply_update(spec, s, &changed, &cfg.run) {
                    Ok(refresh) => {
                        t.refresh_sets.push(refresh);
                        t.manifests.extend(s.manifest().cloned());
                    }
                    Err(e) => t.errors.push(e.to_string()),
                }
            }
            Action::Expect { state: expected } => {
                let actual = session.as_ref().map_or(SessionState::Idle, RunSession::state);
                if actual != *expected {
                    t.failed_expectations.push(ExpectOutcome {
                        step: i + 1,
                        expected: *expected,
                        actual,
                    });
                }
            }
        }
    }
    if let Some(s) = &session {
        tally(&mut t, s);
        t.final_state = Some(s.state());
    }
    Ok(t)
}
