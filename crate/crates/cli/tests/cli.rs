mod support;

use std::path::Path;

use guigen_cli::{default_spec_dir, run, Args, CliError};
use guigen_core::spec::from_json;
use support::*;

fn intervor_project() -> tempfile::TempDir {
    let tmp = tempfile::tempdir().unwrap();
    copy_dir(&demo("intervor/plugins/step1_design"), &tmp.path().join("step1_design"));
    tmp
}

fn stderr(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn example1_writes_spec_trees_and_archives() {
    let project = intervor_project();
    let out = gui_generator(project.path(), &example1_args(&["pyqt", "tkinter", "panel-ngljs"]).iter().map(String::as_str).collect::<Vec<_>>());
    assert!(out.status.success(), "{}", stderr(&out));
    let spec_path = project.path().join("step2_formal_spec/sbl-intervor-ABW-atomic.spec.json");
    let spec = from_json(&std::fs::read_to_string(&spec_path).unwrap()).unwrap();
    assert_eq!(spec.meta.exe, "sbl-intervor-ABW-atomic.exe");

    let gp = project.path().join("generated_plugins");
    let mut entries: Vec<String> = std::fs::read_dir(&gp)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    entries.sort();
    assert_eq!(entries, ["panel-ngljs", "pymol.tar.gz", "pyqt", "tkinter", "vmd.tar.gz", "web.tar.gz"]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 4);
}

#[test]
fn threejs_alone_gets_web_archive_with_mesh_engine() {
    let project = intervor_project();
    let args = example1_args(&["panel-threejs"]);
    let out = gui_generator(project.path(), &args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(out.status.success(), "{}", stderr(&out));
    let gp = project.path().join("generated_plugins");
    assert!(gp.join("web.tar.gz").is_file());
    let cfg: serde_json::Value =
        serde_json::from_slice(&std::fs::read(gp.join("panel-threejs/host-config.json")).unwrap()).unwrap();
    assert_eq!(cfg["engine_hint"], "mesh");
}

#[test]
fn spec_only_stops_after_step2() {
    let project = intervor_project();
    let mut args = example1_args(&["pyqt"]);
    args.push("--spec-only".into());
    let out = gui_generator(project.path(), &args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(project.path().join("step2_formal_spec/sbl-intervor-ABW-atomic.spec.json").is_file());
    assert!(!project.path().join("generated_plugins").exists());

    // --format is optional with --spec-only.
    let without: Vec<&str> = args.iter().map(String::as_str).filter(|a| *a != "--format" && *a != "pyqt").collect();
    assert!(gui_generator(project.path(), &without).status.success());
}

#[test]
fn spec_location_follows_the_project_layout() {
    assert_eq!(default_spec_dir(Path::new("p/step1_design/layout.ui")), Path::new("p/step2_formal_spec"));
    assert_eq!(default_spec_dir(Path::new("step1_design/layout.ui")), Path::new("step2_formal_spec"));
    assert_eq!(default_spec_dir(Path::new("layout.ui")), Path::new("step2_formal_spec"));
    assert_eq!(default_spec_dir(Path::new("/x/designs/layout.ui")), Path::new("step2_formal_spec"));
}

#[test]
fn usage_errors_exit_2() {
    let project = intervor_project();
    let base = example1_args(&["pyqt"]);
    let base: Vec<&str> = base.iter().map(String::as_str).collect();
    let cases: Vec<Vec<&str>> = vec![
        [&base[..], &["--bogus"]].concat(),
        base.iter().copied().filter(|a| *a != "--ui" && *a != "step1_design/layout.ui").collect(),
        base.iter().copied().filter(|a| *a != "pyqt").collect(),
        base.iter().map(|a| if *a == "pyqt" { "qt6" } else { a }).collect(),
        [&base[..], &["pyqt"]].concat(),
    ];
    for args in cases {
        let out = gui_generator(project.path(), &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
    assert!(!project.path().join("generated_plugins").exists());
}

#[test]
fn validation_errors_exit_1_with_file_and_line() {
    let project = intervor_project();
    let args = example1_args(&["pyqt"]);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();

    let flags = project.path().join("step1_design/selected_flags.txt");
    let good = std::fs::read_to_string(&flags).unwrap();
    std::fs::write(&flags, format!("{good}--broken|complex|0|Broken\n")).unwrap();
    let out = gui_generator(project.path(), &args);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    let line = good.lines().count() + 1;
    assert!(msg.contains("selected_flags.txt") && msg.contains(&format!("line {line}")), "{msg}");
    std::fs::write(&flags, good).unwrap();

    let layout = project.path().join("step1_design/layout.ui");
    let text = std::fs::read_to_string(&layout).unwrap();
    let bad = text.replacen("<widget class=\"QLabel\"", "<widget class=\"QLabel\" noname=\"x\" ", 1).replacen(" name=\"lbl_pdb\"", "", 1);
    std::fs::write(&layout, bad).unwrap();
    let out = gui_generator(project.path(), &args);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains("layout.ui") && msg.contains("line "), "{msg}");
    assert!(msg.contains("layout-parser"), "{msg}");
}

#[test]
fn duplicate_format_is_rejected_in_process() {
    let project = intervor_project();
    let p = |rel: &str| project.path().join(rel);
    let args = Args {
        ui: p("step1_design/layout.ui"),
        exe: "x.exe".into(),
        flags: p("step1_design/selected_flags.txt"),
        update_flags: None,
        post_script: "post.py".into(),
        format: vec!["tkinter".parse().unwrap(), "tkinter".parse().unwrap()],
        gui_output: p("out"),
        spec_only: false,
        app_name: None,
        spec_output: None,
    };
    let err = run(&args).unwrap_err();
    assert!(matches!(err, CliError::DuplicateFormat(_)));
    assert_eq!(err.exit_code(), 2);

    // A pre-drawn update widget needs its catalog.
    let args = Args { format: vec!["pyqt".parse().unwrap()], ..args };
    assert!(matches!(run(&args).unwrap_err(), CliError::Build(_)));
    let args = Args {
        update_flags: Some(p("step1_design/update_area_flags.txt")),
        ..args
    };
    let report = run(&args).unwrap();
    assert_eq!(report.spec_path, p("step2_formal_spec/x.spec.json"));
    assert_eq!(report.outputs.len(), 1);
}

#[test]
fn rerunning_rewrites_identical_bytes() {
    let project = intervor_project();
    let args = example1_args(&["pyqt", "tkinter", "panel-ngljs", "panel-threejs"]);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    assert!(gui_generator(project.path(), &args).status.success());
    let first = tree_files(project.path());
    assert!(gui_generator(project.path(), &args).status.success());
    assert_eq!(tree_files(project.path()), first);
}

#[test]
fn one_new_flag_line_reaches_every_backend() {
    let project = intervor_project();
    let args = example1_args(&["pyqt", "tkinter", "panel-ngljs", "panel-threejs"]);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let views = |dir: &Path| -> Vec<Vec<String>> {
        ["pyqt", "tkinter", "panel-ngljs", "panel-threejs"]
            .iter()
            .map(|b| scan_view_ids(&std::fs::read_to_string(dir.join(b).join("view.py")).unwrap()))
            .collect()
    };
    assert!(gui_generator(project.path(), &args).status.success());
    let before = views(&project.path().join("generated_plugins"));

    let flags = project.path().join("step1_design/selected_flags.txt");
    let text = std::fs::read_to_string(&flags).unwrap();
    std::fs::write(&flags, format!("{text}--min-area|float|0|Minimum patch area\n")).unwrap();
    assert!(gui_generator(project.path(), &args).status.success());
    let after = views(&project.path().join("generated_plugins"));

    for (b, a) in before.iter().zip(&after) {
        let added: Vec<&String> = a.iter().filter(|id| !b.contains(id)).collect();
        assert_eq!(added, ["flag__min_area"]);
        assert!(b.iter().all(|id| a.contains(id)));
    }
    assert!(after.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn demos_regenerate_byte_identical() {
    for rel in DEMOS {
        let tmp = tempfile::tempdir().unwrap();
        let out = regenerate_demo(rel, tmp.path());
        assert!(out.status.success(), "{rel}: {}", stderr(&out));
        for step in ["step2_formal_spec", "step3_generated_code"] {
            let fresh = tree_files(&tmp.path().join(step));
            let golden = tree_files(&demo(rel).join(step));
            assert!(!golden.is_empty(), "{rel}/{step} is not checked in");
            assert_eq!(fresh.keys().collect::<Vec<_>>(), golden.keys().collect::<Vec<_>>(), "{rel}/{step}");
            for (path, bytes) in &golden {
                assert!(fresh[path] == *bytes, "{rel}/{step}/{path} differs from the checked-in copy");
            }
        }
    }
}
