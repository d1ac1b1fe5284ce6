mod common;

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Stdio};

use guigen_core::codegen::{
    archive_bytes, archive_entries, generate, package, package_all, view_widget_ids, BackendId, CodegenError,
    GeneratedTree, MANIFEST_FILE,
};
use guigen_core::harness::corpus::{random_spec, random_state};
use guigen_core::presenter::{build_command, PresenterError, RefreshSet, WidgetState};
use guigen_core::spec::{self, GuiSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{intervor_spec, small_spec};

/// Independent id scanner: every string literal that directly follows
/// `_add(` anywhere in the source.
fn scan_ids(source: &str) -> Vec<String> {
    let mut ids = Vec::new();
    let mut rest = source;
    while let Some(at) = rest.find("_add(\"") {
        let body = &rest[at + 6..];
        let mut value = String::new();
        let mut chars = body.chars();
        while let Some(c) = chars.next() {
            match c {
                '"' => break,
                '\\' => match chars.next().unwrap() {
                    'n' => value.push('\n'),
                    't' => value.push('\t'),
                    'u' => {
                        let hex: String = chars.by_ref().take(4).collect();
                        value.push(char::from_u32(u32::from_str_radix(&hex, 16).unwrap()).unwrap());
                    }
                    other => value.push(other),
                },
                c => value.push(c),
            }
        }
        ids.push(value);
        rest = &body[1..];
    }
    ids
}

fn spec_ids(spec: &GuiSpec) -> Vec<String> {
    spec.widgets.iter().map(|w| w.id.clone()).collect()
}

fn manifest_paths(tree: &GeneratedTree) -> Vec<String> {
    tree.text(MANIFEST_FILE)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_once("  ").unwrap().1.to_owned())
        .collect()
}

fn corpus(n: usize) -> Vec<GuiSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0de);
    let mut specs = vec![intervor_spec(), small_spec()];
    specs.extend((0..n).map(|_| random_spec(&mut rng, 8)));
    specs
}

#[test]
fn tkinter_tree_has_view_runtime_spec_glue_listener_and_manifest() {
    let tree = generate(&small_spec(), BackendId::Tkinter).unwrap();
    let names: BTreeSet<&str> = tree.files.keys().map(String::as_str).collect();
    let expected: BTreeSet<&str> = [
        "MANIFEST.txt",
        "presenter.py",
        "small.spec.json",
        "view.py",
        "vmd_plugin.tcl",
        "vmd_socket_server.tcl",
    ]
    .into();
    assert_eq!(names, expected);
    assert!(tree.text("vmd_socket_server.tcl").unwrap().contains("vmd_visualize_sbl_plugin"));
    assert!(tree.text("vmd_plugin.tcl").unwrap().contains("vmd_install_extension"));
}

#[test]
fn other_backends_emit_their_glue() {
    let spec = small_spec();
    let pyqt = generate(&spec, BackendId::Pyqt).unwrap();
    assert!(pyqt.text("__init__.py").unwrap().contains("def __init_plugin__"));
    for (backend, hint) in [(BackendId::PanelNgljs, "molecular"), (BackendId::PanelThreejs, "mesh")] {
        let tree = generate(&spec, backend).unwrap();
        let config: serde_json::Value = serde_json::from_slice(tree.file("host-config.json").unwrap()).unwrap();
        assert_eq!(config["engine_hint"], hint);
        assert_eq!(config["spec_file"], "small.spec.json");
    }
}

#[test]
fn spec_copy_is_canonical_json_and_views_carry_its_digest() {
    let spec = intervor_spec();
    let json = spec::to_json(&spec).unwrap();
    let digest = spec::digest(&json);
    for backend in BackendId::ALL {
        let tree = generate(&spec, backend).unwrap();
        assert_eq!(tree.text("intervor.spec.json").unwrap(), json);
        assert!(tree.view_source().contains(&format!("# spec-digest: {digest}\n")));
    }
}

#[test]
fn widget_inventory_is_identical_across_backends() {
    for spec in corpus(60) {
        let expected = spec_ids(&spec);
        for backend in BackendId::ALL {
            let tree = generate(&spec, backend).unwrap();
            assert_eq!(scan_ids(tree.view_source()), expected, "{backend} {}", spec.meta.app_name);
            assert_eq!(view_widget_ids(tree.view_source()), expected);
        }
    }
}

#[test]
fn manifest_lists_every_file_with_its_digest() {
    use sha2::{Digest, Sha256};
    for backend in BackendId::ALL {
        let tree = generate(&intervor_spec(), backend).unwrap();
        let text = tree.text(MANIFEST_FILE).unwrap();
        assert!(text.starts_with("# gui-generator "));
        for line in text.lines().filter(|l| !l.starts_with('#')) {
            let (digest, path) = line.split_once("  ").unwrap();
            if path == MANIFEST_FILE {
                assert_eq!(digest, "-");
            } else {
                assert_eq!(digest, hex::encode(Sha256::digest(tree.file(path).unwrap())), "{path}");
            }
        }
        assert_eq!(manifest_paths(&tree), tree.files.keys().cloned().collect::<Vec<_>>());
    }
}

#[test]
fn archive_entries_follow_manifest_order() {
    let tree = generate(&intervor_spec(), BackendId::Tkinter).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = package(&tree, dir.path()).unwrap();
    assert_eq!(path.file_name().unwrap(), "vmd.tar.gz");
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(archive_entries(&bytes).unwrap(), manifest_paths(&tree));
    assert!(dir.path().join("tkinter/view.py").is_file());
}

#[test]
fn archive_names_follow_the_fixed_map() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec();
    for (backend, name) in [
        (BackendId::Pyqt, "pymol.tar.gz"),
        (BackendId::Tkinter, "vmd.tar.gz"),
        (BackendId::PanelNgljs, "web.tar.gz"),
        (BackendId::PanelThreejs, "web.tar.gz"),
    ] {
        let path = package(&generate(&spec, backend).unwrap(), dir.path()).unwrap();
        assert_eq!(path.file_name().unwrap(), name);
    }
}

#[test]
fn archive_metadata_is_fixed() {
    let tree = generate(&small_spec(), BackendId::Pyqt).unwrap();
    let bytes = archive_bytes(&tree).unwrap();
    // gzip header: magic, method, flags, then a zero mtime.
    assert_eq!(&bytes[..8], &[0x1f, 0x8b, 8, 0, 0, 0, 0, 0]);
    let mut archive = tar::Archive::new(flate2::read::GzDecoder::new(bytes.as_slice()));
    for entry in archive.entries().unwrap() {
        let entry = entry.unwrap();
        let h = entry.header();
        assert_eq!(h.mtime().unwrap(), 0);
        assert_eq!(h.mode().unwrap(), 0o644);
        assert_eq!((h.uid().unwrap(), h.gid().unwrap()), (0, 0));
        assert!(entry.path().unwrap().starts_with("small_pyqt"));
    }
}

#[test]
fn generation_and_packaging_are_byte_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for spec in corpus(5) {
        for backend in BackendId::ALL {
            let first = generate(&spec, backend).unwrap();
            assert_eq!(first, generate(&spec, backend).unwrap());
            let pa = package(&first, a.path()).unwrap();
            let bytes_a = std::fs::read(&pa).unwrap();
            let pb = package(&generate(&spec, backend).unwrap(), b.path()).unwrap();
            assert_eq!(bytes_a, std::fs::read(&pb).unwrap());
            // Packaging again over an existing output is also identical.
            let again = package(&first, a.path()).unwrap();
            assert_eq!(bytes_a, std::fs::read(again).unwrap());
        }
    }
}

#[test]
fn both_web_targets_in_one_invocation_get_distinct_archives() {
    let spec = small_spec();
    let trees: Vec<_> = [BackendId::PanelThreejs, BackendId::PanelNgljs]
        .into_iter()
        .map(|b| generate(&spec, b).unwrap())
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let paths = package_all(&trees, dir.path()).unwrap();
    let names: Vec<_> = paths.iter().map(|p| p.file_name().unwrap().to_str().unwrap()).collect();
    assert_eq!(names, ["web-threejs.tar.gz", "web.tar.gz"]);
    let manifest = trees[0].text(MANIFEST_FILE).unwrap();
    assert!(manifest.contains("web-threejs.tar.gz when packaged together with panel-ngljs"));
}

#[test]
fn duplicate_backends_are_rejected() {
    let tree = generate(&small_spec(), BackendId::Pyqt).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let err = package_all(&[tree.clone(), tree], dir.path()).unwrap_err();
    assert!(matches!(err, CodegenError::DuplicateBackend(BackendId::Pyqt)));
}

#[test]
fn invalid_inputs_are_rejected() {
    let mut spec = small_spec();
    spec.meta.exe.clear();
    assert!(matches!(generate(&spec, BackendId::Pyqt), Err(CodegenError::SpecInvalid(_))));

    let mut spec = small_spec();
    spec.meta.app_name = "../escape".into();
    assert!(matches!(generate(&spec, BackendId::Pyqt), Err(CodegenError::BadAppName(_))));

    let empty = GeneratedTree {
        backend: BackendId::Pyqt,
        files: Default::default(),
    };
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(package(&empty, dir.path()), Err(CodegenError::EmptyTree)));
}

#[test]
fn foreign_output_directories_are_left_alone() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(dir.path().join("pyqt")).unwrap();
    std::fs::write(dir.path().join("pyqt/notes.txt"), "mine").unwrap();
    let tree = generate(&small_spec(), BackendId::Pyqt).unwrap();
    assert!(matches!(package(&tree, dir.path()), Err(CodegenError::OutputOccupied(_))));
    assert_eq!(std::fs::read_to_string(dir.path().join("pyqt/notes.txt")).unwrap(), "mine");
}

fn python_available() -> bool {
    Command::new("python3").arg("--version").output().is_ok_and(|o| o.status.success())
}

fn write_tree(tree: &GeneratedTree, dir: &Path) {
    for (rel, bytes) in &tree.files {
        std::fs::write(dir.join(rel), bytes).unwrap();
    }
}

#[test]
fn generated_python_compiles() {
    assert!(python_available(), "python3 is required for this test");
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (i, spec) in corpus(20).iter().enumerate() {
        for backend in BackendId::ALL {
            let sub = dir.path().join(format!("{i}-{backend}"));
            std::fs::create_dir(&sub).unwrap();
            let tree = generate(spec, backend).unwrap();
            write_tree(&tree, &sub);
            files.extend(tree.files.keys().filter(|p| p.ends_with(".py")).map(|p| sub.join(p)));
        }
    }
    let out = Command::new("python3").arg("-m").arg("py_compile").args(&files).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

const PARITY_DRIVER: &str = r#"
import json, sys
sys.path.insert(0, sys.argv[1])
import presenter
for line in sys.stdin:
    case = json.loads(line)
    spec = presenter.load_spec(case["spec"])
    try:
        if "state" in case:
            out = presenter.build_command(spec, case["state"])
        else:
            out = presenter.refresh_set(spec, case["changed"])
    except presenter.PresenterError as e:
        out = {"error": e.kind}
    print(json.dumps(out))
"#;

fn error_kind(e: &PresenterError) -> &'static str {
    match e {
        PresenterError::UnknownWidget(_) => "UnknownWidget",
        PresenterError::StateTypeMismatch { .. } => "StateTypeMismatch",
        PresenterError::MissingRequiredFile { .. } => "MissingRequiredFile",
        PresenterError::UnknownUpdateFlag(_) => "UnknownUpdateFlag",
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn desktop_runtime_agrees_with_presenter_on_argv_and_refresh() {
    assert!(python_available(), "python3 is required for this test");
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xfa11);
    let mut cases = String::new();
    let mut expected = Vec::new();
    let mut runtime_dir = None;
    for (i, spec) in corpus(150).iter().enumerate() {
        let tree = generate(spec, BackendId::Pyqt).unwrap();
        let spec_path = dir.path().join(format!("{i}.spec.json"));
        std::fs::write(&spec_path, tree.file(&spec::file_name(spec)).unwrap()).unwrap();
        if runtime_dir.is_none() {
            let rt = dir.path().join("runtime");
            std::fs::create_dir(&rt).unwrap();
            std::fs::write(rt.join("presenter.py"), tree.file("presenter.py").unwrap()).unwrap();
            runtime_dir = Some(rt);
        }
        for _ in 0..10 {
            let entries = random_state(&mut rng, spec, 0.1);
            let state = WidgetState(entries.into_iter().collect());
            let want = match build_command(spec, &state) {
                Ok(plan) => serde_json::json!(plan.argv),
                Err(e) => serde_json::json!({ "error": error_kind(&e) }),
            };
            cases += &serde_json::json!({ "spec": spec_path, "state": state }).to_string();
            cases.push('\n');
            expected.push(want);
        }
        let tokens: Vec<&str> = spec.update_flags.iter().map(|b| b.flag.token.as_str()).collect();
        for _ in 0..3 {
            let mut changed: Vec<&str> = tokens.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
            if rng.random_bool(0.1) {
                changed.push("--not-an-update-flag");
            }
            let want = match RefreshSet::for_changes(spec, changed.iter().copied()) {
                Ok(r) => serde_json::to_value(&r).unwrap(),
                Err(e) => serde_json::json!({ "error": error_kind(&e) }),
            };
            cases += &serde_json::json!({ "spec": spec_path, "changed": changed }).to_string();
            cases.push('\n');
            expected.push(want);
        }
    }
    let mut child = Command::new("python3")
        .arg("-c")
        .arg(PARITY_DRIVER)
        .arg(runtime_dir.unwrap())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(cases.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let got: Vec<serde_json::Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(got.len(), expected.len());
    let lines: Vec<&str> = cases.lines().collect();
    for (i, (g, e)) in got.iter().zip(&expected).enumerate() {
        assert_eq!(g, e, "case {}", lines[i]);
    }
}
