#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_gui-generator"))
}

pub fn demo(rel: &str) -> PathBuf {
    root().join("demos").join(rel)
}

/// Run the generator in `cwd`.
pub fn gui_generator(cwd: &Path, args: &[&str]) -> Output {
    Command::new(bin()).current_dir(cwd).args(args).output().unwrap()
}

/// The Example 1 invocation over a `step1_design/` folder, run from its parent.
pub fn example1_args(formats: &[&str]) -> Vec<String> {
    let mut args: Vec<String> = [
        "--ui",
        "step1_design/layout.ui",
        "--exe",
        "sbl-intervor-ABW-atomic.exe",
        "--flags",
        "step1_design/selected_flags.txt",
        "--update-flags",
        "step1_design/update_area_flags.txt",
        "--post-script",
        "post_analysis.py",
        "--format",
    ]
    .map(String::from)
    .to_vec();
    args.extend(formats.iter().map(|f| f.to_string()));
    args
}

pub fn copy_dir(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for entry in std::fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let dest = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &dest);
        } else {
            std::fs::copy(entry.path(), dest).unwrap();
        }
    }
}

/// Every file below `dir`, keyed by its `/`-separated relative path.
pub fn tree_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(base: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(base, &path, out);
            } else {
                let rel = path.strip_prefix(base).unwrap().to_str().unwrap().replace('\\', "/");
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    if dir.exists() {
        walk(dir, dir, &mut out);
    }
    out
}

/// Widget ids in a generated view, found by looking for `_add("<id>"`.
pub fn scan_view_ids(source: &str) -> Vec<String> {
    let mut ids = Vec::new();
    let mut rest = source;
    while let Some(at) = rest.find("._add(\"") {
        rest = &rest[at + 7..];
        let end = rest.find('"').unwrap();
        ids.push(rest[..end].to_owned());
        rest = &rest[end..];
    }
    ids
}

/// Demo projects with a run_generator.sh, relative to `demos/`.
pub const DEMOS: [&str; 6] = [
    "intervor/plugins",
    "alpha_complex/plugins",
    "synthetic/app1",
    "synthetic/app2",
    "synthetic/app3",
    "synthetic/app4",
];

/// Copy a demo's step1 inputs and script to `dest` and run the script with
/// the freshly built generator.
pub fn regenerate_demo(rel: &str, dest: &Path) -> Output {
    let src = demo(rel);
    copy_dir(&src.join("step1_design"), &dest.join("step1_design"));
    std::fs::copy(src.join("run_generator.sh"), dest.join("run_generator.sh")).unwrap();
    Command::new("sh")
        .arg(dest.join("run_generator.sh"))
        .env("GUI_GENERATOR", bin())
        .output()
        .unwrap()
}
