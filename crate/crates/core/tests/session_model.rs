//! Drive the step-wise session API with every short operation sequence and
//! check that only legal edges are ever taken.

use std::collections::HashSet;
use std::time::Duration;

use guigen_core::builder::build_from_documents;
use guigen_core::presenter::{
    ArtifactManifest, CommandPlan, ExecOutcome, PresenterError, RunSession, SessionState,
};
use guigen_core::spec::MetaBlock;

#[derive(Debug, Clone, Copy)]
enum Op {
    BeginRun,
    ExitZero,
    ExitNonZero,
    RunTimeout,
    BeginPost,
    PostOk,
    PostErr,
}

const OPS: [Op; 7] = [Op::BeginRun, Op::ExitZero, Op::ExitNonZero, Op::RunTimeout, Op::BeginPost, Op::PostOk, Op::PostErr];

fn outcome(code: i32) -> ExecOutcome {
    ExecOutcome {
        exit_code: Some(code),
        stderr_tail: String::new(),
        wall_time: Duration::ZERO,
    }
}

fn apply(s: &mut RunSession, op: Op) {
    let _ = match op {
        Op::BeginRun => s
            .begin_run(CommandPlan {
                argv: vec!["x".into()],
                workdir: Default::default(),
            })
            .map(drop),
        Op::ExitZero => s.finish_run(Ok(outcome(0))),
        Op::ExitNonZero => s.finish_run(Ok(outcome(1))),
        Op::RunTimeout => s.finish_run(Err(PresenterError::Timeout(Duration::from_secs(1)))),
        Op::BeginPost => s.begin_post().map(drop),
        Op::PostOk => s.finish_post(Ok(ArtifactManifest::default())).map(drop),
        Op::PostErr => s.finish_post(Err(PresenterError::ManifestMissing("m".into()))).map(drop),
    };
}

#[test]
fn every_sequence_takes_only_legal_edges() {
    let root = tempfile::tempdir().unwrap();
    let layout = r#"<ui><widget class="QWidget" name="R">
 <widget class="QGroupBox" name="area_input"><property name="geometry"><rect><x>0</x><y>0</y><width>9</width><height>9</height></rect></property></widget>
 <widget class="QGroupBox" name="area_output"><property name="geometry"><rect><x>9</x><y>0</y><width>9</width><height>9</height></rect></property></widget>
</widget></ui>"#;
    let spec = build_from_documents(layout, "", "", MetaBlock::new("m", "m.exe", "p.py")).unwrap();
    let fresh = RunSession::create(root.path(), &spec).unwrap();

    let mut edges = HashSet::new();
    let max_len = 6;
    let mut sequences = 0;
    let mut stack: Vec<(RunSession, usize)> = vec![(fresh, 0)];
    while let Some((session, depth)) = stack.pop() {
        if depth == max_len {
            continue;
        }
        for op in OPS {
            let mut next = session.clone();
            let before = next.state();
            apply(&mut next, op);
            let after = next.state();
            if before != after {
                assert!(before.can_become(after), "{op:?} took {before} -> {after}");
                edges.insert((before, after));
            }
            sequences += 1;
            stack.push((next, depth + 1));
        }
    }
    assert!(sequences > 100_000);
    use SessionState::*;
    let all: HashSet<_> = [
        (Idle, Running),
        (Running, PostAnalysis),
        (Running, Failed),
        (PostAnalysis, Ready),
        (PostAnalysis, Failed),
        (Ready, PostAnalysis),
    ]
    .into_iter()
    .collect();
    assert_eq!(edges, all, "every legal edge is reachable");
}

#[test]
fn transition_table() {
    use SessionState::*;
    let legal = |a, b| {
        matches!(
            (a, b),
            (Idle, Running) | (Running, PostAnalysis) | (Running, Failed) | (PostAnalysis, Ready) | (PostAnalysis, Failed) | (Ready, PostAnalysis)
        )
    };
    for a in SessionState::ALL {
        for b in SessionState::ALL {
            assert_eq!(a.can_become(b), legal(a, b), "{a} -> {b}");
        }
    }
}
