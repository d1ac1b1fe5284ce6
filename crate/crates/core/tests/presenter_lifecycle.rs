mod common;

use std::collections::BTreeMap;
use std::time::Duration;

use common::*;
use guigen_core::flags::RefreshTarget;
use guigen_core::presenter::{
    apply_update, build_command, run_post_analysis, start_run, ManifestCode, PresenterError, RunSession,
    SessionState, WidgetState,
};

fn small_state() -> WidgetState {
    let mut s = WidgetState::new();
    s.set("flag__in", "data file.pdb").set("flag__verbose", true).set("flag__radius", " 3.0 ");
    s
}

fn values(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

#[test]
fn example_argv_shape() {
    let spec = small_spec();
    let plan = build_command(&spec, &small_state()).unwrap();
    assert_eq!(plan.argv, ["small.exe", "--in", "data file.pdb", "--verbose", "--radius", "3.0"]);
}

#[test]
fn required_file_and_type_errors() {
    let spec = small_spec();
    let mut s = WidgetState::new();
    s.set("flag__verbose", true);
    assert!(matches!(build_command(&spec, &s), Err(PresenterError::MissingRequiredFile { .. })));
    s.set("flag__in", "   ");
    assert!(matches!(build_command(&spec, &s), Err(PresenterError::MissingRequiredFile { .. })));
    s.set("flag__in", "x").set("flag__verbose", "yes");
    assert!(matches!(build_command(&spec, &s), Err(PresenterError::StateTypeMismatch { .. })));
    let mut s = small_state();
    s.set("flag__radius", "wide");
    assert!(matches!(build_command(&spec, &s), Err(PresenterError::StateTypeMismatch { .. })));
    let mut s = small_state();
    s.set("flag__nope", true);
    assert!(matches!(build_command(&spec, &s), Err(PresenterError::UnknownWidget(_))));
}

#[test]
fn happy_path_reaches_ready_and_echo_matches_plan() {
    let root = tempfile::tempdir().unwrap();
    let spec = small_spec();
    let cfg = fake_config("echo_exe.py", "post_log_only.py");
    let session = start_run(&spec, &small_state(), root.path(), &cfg).unwrap();
    assert_eq!(session.state(), SessionState::Ready, "{:?}", session.error());
    let echoed: Vec<String> = serde_json::from_str(&read(session.run_dir().join("argv.json"))).unwrap();
    let plan = build_command(&spec, &small_state()).unwrap();
    assert_eq!(echoed, plan.argv[1..]);
    assert_eq!(session.argv().unwrap(), plan.argv.as_slice());
    let manifest = session.manifest().unwrap();
    assert_eq!(manifest.slots["log"].path, "log.txt");
    assert!(session.run_dir().join("post/log.txt").is_file());
    assert_eq!(session.exit_code(), Some(0));
    // Defaults of update flags reach post-analysis on the first pass.
    let post_argv: Vec<String> = serde_json::from_str(&read(session.run_dir().join("post_argv.json"))).unwrap();
    assert_eq!(post_argv, ["--color", "a", "--bins", "10", "--smooth", "0.5"]);
}

#[test]
fn failing_exe_records_exit_and_stderr() {
    let root = tempfile::tempdir().unwrap();
    let session = start_run(&small_spec(), &small_state(), root.path(), &fake_config("failing_exe.sh", "post_log_only.py")).unwrap();
    assert_eq!(session.state(), SessionState::Failed);
    assert_eq!(session.exit_code(), Some(3));
    assert_eq!(session.stderr_tail(), "fatal: cannot read input\n");
    assert_eq!(session.post_invocations(), 0);
}

#[test]
fn timeout_and_missing_exe() {
    let root = tempfile::tempdir().unwrap();
    let mut cfg = fake_config("slow_exe.sh", "post_log_only.py");
    cfg.timeout = Duration::from_millis(200);
    let err = start_run(&small_spec(), &small_state(), root.path(), &cfg).unwrap_err();
    assert!(matches!(err, PresenterError::Timeout(_)));

    let cfg = fake_config("does_not_exist.exe", "post_log_only.py");
    let err = start_run(&small_spec(), &small_state(), root.path(), &cfg).unwrap_err();
    assert!(matches!(err, PresenterError::ExeNotFound(_)));

    // No override: the spec's executable is looked up on PATH.
    let err = start_run(&small_spec(), &small_state(), root.path(), &Default::default()).unwrap_err();
    assert!(matches!(err, PresenterError::ExeNotFound(_)));
}

fn post_error(post: &str) -> (RunSession, PresenterError) {
    let root = tempfile::tempdir().unwrap().keep();
    let spec = small_spec();
    let cfg = fake_config("echo_exe.py", post);
    let mut session = RunSession::create(&root, &spec).unwrap();
    let err = session.launch(&spec, &small_state(), &cfg).unwrap_err();
    (session, err)
}

#[test]
fn post_analysis_failures() {
    let (s, e) = post_error("post_failing.sh");
    assert_eq!(s.state(), SessionState::Failed);
    assert!(matches!(e, PresenterError::PostScriptFailure { exit_code: Some(2), .. }));

    let (_, e) = post_error("post_no_manifest.sh");
    assert!(matches!(e, PresenterError::ManifestMissing(_)));

    for (post, code) in [
        ("post_unknown_slot.py", ManifestCode::UnknownSlot),
        ("post_path_escape.py", ManifestCode::PathEscape),
        ("post_media_mismatch.py", ManifestCode::MediaMismatch),
    ] {
        let (s, e) = post_error(post);
        assert_eq!(s.state(), SessionState::Failed);
        match e {
            PresenterError::ManifestInvalid(v) => assert!(v.iter().any(|x| x.code == code), "{post}: {v:?}"),
            other => panic!("{post}: {other:?}"),
        }
    }
}

#[test]
fn start_run_keeps_session_on_post_failure() {
    let root = tempfile::tempdir().unwrap();
    let s = start_run(&small_spec(), &small_state(), root.path(), &fake_config("echo_exe.py", "post_failing.sh")).unwrap();
    assert_eq!(s.state(), SessionState::Failed);
    assert!(s.error().unwrap().contains("post-analysis"));
}

#[test]
fn updates_rerun_post_only() {
    let root = tempfile::tempdir().unwrap();
    let spec = small_spec();
    let cfg = fake_config("echo_exe.py", "post_log_only.py");
    let mut s = start_run(&spec, &small_state(), root.path(), &cfg).unwrap();
    let n = 5;
    for i in 0..n {
        let r = apply_update(&spec, &mut s, &values(&[("--bins", &(20 + i).to_string())]), &cfg).unwrap();
        assert_eq!(r.targets.iter().copied().collect::<Vec<_>>(), [RefreshTarget::Outputs]);
        assert_eq!(r.slots_to_refresh, ["log"]);
        assert_eq!(s.state(), SessionState::Ready);
    }
    assert_eq!(count_lines(&s.run_dir().join("exe_calls")), 1);
    assert_eq!(count_lines(&s.run_dir().join("post_calls")), n as usize + 1);
    assert_eq!((s.exe_invocations(), s.post_invocations()), (1, n + 1));
    let post_argv: Vec<String> = serde_json::from_str(&read(s.run_dir().join("post_argv.json"))).unwrap();
    assert_eq!(post_argv, ["--color", "a", "--bins", "24", "--smooth", "0.5"]);

    let r = apply_update(&spec, &mut s, &values(&[("--color", "b")]), &cfg).unwrap();
    assert!(r.slots_to_refresh.is_empty());
    assert_eq!(r.targets.len(), 1);
    let r = apply_update(&spec, &mut s, &values(&[("--color", "a"), ("--bins", "3")]), &cfg).unwrap();
    assert_eq!(r.targets.len(), 2);
}

#[test]
fn update_errors() {
    let root = tempfile::tempdir().unwrap();
    let spec = small_spec();
    let cfg = fake_config("echo_exe.py", "post_log_only.py");
    let mut s = start_run(&spec, &small_state(), root.path(), &cfg).unwrap();
    assert!(matches!(
        apply_update(&spec, &mut s, &values(&[("--radius", "2")]), &cfg),
        Err(PresenterError::UnknownUpdateFlag(_))
    ));
    assert!(matches!(
        apply_update(&spec, &mut s, &values(&[("--color", "purple")]), &cfg),
        Err(PresenterError::UpdateValueMismatch { .. })
    ));
    assert_eq!(s.state(), SessionState::Ready);

    let mut idle = RunSession::create(root.path(), &spec).unwrap();
    assert!(matches!(
        apply_update(&spec, &mut idle, &BTreeMap::new(), &cfg),
        Err(PresenterError::NotReady(SessionState::Idle))
    ));
    assert!(matches!(
        run_post_analysis(&spec, &mut idle, &BTreeMap::new(), &cfg),
        Err(PresenterError::NotReady(SessionState::Idle))
    ));

    // A failed update keeps the previous manifest on display.
    let before = s.manifest().cloned();
    let bad = fake_config("echo_exe.py", "post_failing.sh");
    assert!(apply_update(&spec, &mut s, &values(&[("--bins", "1")]), &bad).is_err());
    assert_eq!(s.state(), SessionState::Failed);
    assert_eq!(s.manifest().cloned(), before);
}

#[test]
fn update_does_not_touch_input_state() {
    let root = tempfile::tempdir().unwrap();
    let spec = small_spec();
    let cfg = fake_config("echo_exe.py", "post_log_only.py");
    let state = small_state();
    let before = state.clone();
    let mut s = start_run(&spec, &state, root.path(), &cfg).unwrap();
    let argv_before = s.argv().unwrap().to_vec();
    apply_update(&spec, &mut s, &values(&[("--smooth", "0.9")]), &cfg).unwrap();
    assert_eq!(state, before);
    assert_eq!(s.argv().unwrap(), argv_before.as_slice());
}

#[test]
fn intervor_defaults_need_a_pdb_file() {
    let spec = intervor_spec();
    let state = WidgetState::from_defaults(&spec);
    assert!(matches!(build_command(&spec, &state), Err(PresenterError::MissingRequiredFile { .. })));
    let mut state = state;
    state.set("flag__pdb_file", "1abc.pdb");
    let plan = build_command(&spec, &state).unwrap();
    assert_eq!(
        plan.argv,
        [
            "sbl-intervor-ABW-atomic.exe",
            "--pdb-file",
            "1abc.pdb",
            "--partner-A",
            "A",
            "--partner-B",
            "B",
            "--probe-radius",
            "1.4",
            "--max-shelling-order",
            "4",
        ]
    );
}
