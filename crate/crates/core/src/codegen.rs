//! Backend registry, template-driven emitters and archive packaging.
//!
//! Each backend is a row in [`REGISTRY`]: the files it emits, the template
//! set they come from, and its archive name. Views, runtimes and loader glue
//! are text templates under `templates/`; the spec copy, host config and
//! `MANIFEST.txt` are produced here.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use flate2::{Compression, GzBuilder};
use minijinja::{context, AutoEscape, Environment, UndefinedBehavior};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::spec::{self, GuiSpec, ValidationReport};

pub const MANIFEST_FILE: &str = "MANIFEST.txt";
pub const HOST_CONFIG_FILE: &str = "host-config.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BackendId {
    #[serde(rename = "pyqt")]
    Pyqt,
    #[serde(rename = "tkinter")]
    Tkinter,
    #[serde(rename = "panel-ngljs")]
    PanelNgljs,
    #[serde(rename = "panel-threejs")]
    PanelThreejs,
}

impl BackendId {
    pub const ALL: [BackendId; 4] = [Self::Pyqt, Self::Tkinter, Self::PanelNgljs, Self::PanelThreejs];

    pub fn as_str(self) -> &'static str {
        self.entry().id
    }

    /// Archive file name before collision handling.
    pub fn archive_name(self) -> &'static str {
        self.entry().archive
    }

    /// Viewer engine named in the web host config.
    pub fn engine_hint(self) -> Option<&'static str> {
        self.entry().engine_hint
    }

    fn entry(self) -> &'static BackendEntry {
        REGISTRY.iter().find(|e| e.backend == self).expect("every backend is registered")
    }
}

impl fmt::Display for BackendId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BackendId {
    type Err = CodegenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        REGISTRY
            .iter()
            .find(|e| e.id == s)
            .map(|e| e.backend)
            .ok_or_else(|| CodegenError::UnknownBackend(s.to_owned()))
    }
}

#[derive(Debug, Error)]
pub enum CodegenError {
    #[error("unknown backend `{0}` (expected one of pyqt, tkinter, panel-ngljs, panel-threejs)")]
    UnknownBackend(String),
    #[error("spec is invalid: {0}")]
    SpecInvalid(ValidationReport),
    #[error("app name `{0}` cannot be used as a file name")]
    BadAppName(String),
    #[error("template {name}: {message}")]
    Template { name: String, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("generated tree is empty")]
    EmptyTree,
    #[error("backend `{0}` requested twice")]
    DuplicateBackend(BackendId),
    #[error("{} exists and was not written by the generator", .0.display())]
    OutputOccupied(PathBuf),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CodegenError + '_ {
    move |source| CodegenError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Generated files of one backend, keyed by relative path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedTree {
    pub backend: BackendId,
    pub files: BTreeMap<String, Vec<u8>>,
}

impl GeneratedTree {
    pub fn file(&self, path: &str) -> Option<&[u8]> {
        self.files.get(path).map(Vec::as_slice)
    }

    pub fn text(&self, path: &str) -> Option<&str> {
        self.file(path).and_then(|b| std::str::from_utf8(b).ok())
    }

    pub fn view_source(&self) -> &str {
        self.text(VIEW_FILE).expect("every backend emits a view")
    }
}

pub const VIEW_FILE: &str = "view.py";

enum Source {
    Template(&'static str),
    Static(&'static str),
}

struct BackendEntry {
    backend: BackendId,
    id: &'static str,
    archive: &'static str,
    /// Appended to the archive stem when another backend in the same
    /// invocation claims the same archive name.
    collision_suffix: &'static str,
    engine_hint: Option<&'static str>,
    files: &'static [(&'static str, Source)],
}

const DESKTOP_RUNTIME: &str = include_str!("../templates/desktop/presenter.py");
const WEB_RUNTIME: &str = include_str!("../templates/panel/presenter.py");

const TEMPLATES: &[(&str, &str)] = &[
    ("pyqt/view.py", include_str!("../templates/pyqt/view.py.j2")),
    ("pyqt/__init__.py", include_str!("../templates/pyqt/__init__.py.j2")),
    ("tkinter/view.py", include_str!("../templates/tkinter/view.py.j2")),
    ("tkinter/vmd_plugin.tcl", include_str!("../templates/tkinter/vmd_plugin.tcl.j2")),
    ("panel/view.py", include_str!("../templates/panel/view.py.j2")),
];

const REGISTRY: &[BackendEntry] = &[
    BackendEntry {
        backend: BackendId::Pyqt,
        id: "pyqt",
        archive: "pymol.tar.gz",
        collision_suffix: "pyqt",
        engine_hint: None,
        files: &[
            ("__init__.py", Source::Template("pyqt/__init__.py")),
            ("presenter.py", Source::Static(DESKTOP_RUNTIME)),
            ("view.py", Source::Template("pyqt/view.py")),
        ],
    },
    BackendEntry {
        backend: BackendId::Tkinter,
        id: "tkinter",
        archive: "vmd.tar.gz",
        collision_suffix: "tkinter",
        engine_hint: None,
        files: &[
            ("presenter.py", Source::Static(DESKTOP_RUNTIME)),
            ("view.py", Source::Template("tkinter/view.py")),
            ("vmd_plugin.tcl", Source::Template("tkinter/vmd_plugin.tcl")),
            (
                "vmd_socket_server.tcl",
                Source::Static(include_str!("../templates/tkinter/vmd_socket_server.tcl")),
            ),
        ],
    },
    BackendEntry {
        backend: BackendId::PanelNgljs,
        id: "panel-ngljs",
        archive: "web.tar.gz",
        collision_suffix: "ngljs",
        engine_hint: Some("molecular"),
        files: &[
            ("presenter.py", Source::Static(WEB_RUNTIME)),
            ("view.py", Source::Template("panel/view.py")),
        ],
    },
    BackendEntry {
        backend: BackendId::PanelThreejs,
        id: "panel-threejs",
        archive: "web.tar.gz",
        collision_suffix: "threejs",
        engine_hint: Some("mesh"),
        files: &[
            ("presenter.py", Source::Static(WEB_RUNTIME)),
            ("view.py", Source::Template("panel/view.py")),
        ],
    },
];

/// Python literal for a template value.
fn py_literal(v: &serde_json::Value) -> String {
    use serde_json::Value as J;
    match v {
        J::Null => "None".into(),
        J::Bool(true) => "True".into(),
        J::Bool(false) => "False".into(),
        J::Number(n) => n.to_string(),
        J::String(s) => serde_json::to_string(s).expect("strings serialize"),
        J::Array(items) => format!("[{}]", items.iter().map(py_literal).collect::<Vec<_>>().join(", ")),
        J::Object(map) => format!(
            "{{{}}}",
            map.iter()
                .map(|(k, v)| format!("{}: {}", py_literal(&J::String(k.clone())), py_literal(v)))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    }
}

/// Double-quoted Tcl word with every substitution character escaped.
fn tcl_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '\\' | '"' | '$' | '[' | ']' | '{' | '}' | ';' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// `s` reduced to ASCII identifier characters, never starting with a digit.
pub fn ident(s: &str) -> String {
    let mut out: String = s
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, '_');
    }
    out
}

fn environment() -> Environment<'static> {
    let mut env = Environment::new();
    env.set_trim_blocks(true);
    env.set_lstrip_blocks(true);
    env.set_keep_trailing_newline(true);
    env.set_undefined_behavior(UndefinedBehavior::Strict);
    env.set_auto_escape_callback(|_| AutoEscape::None);
    env.add_filter("py", |v: minijinja::Value| -> Result<String, minijinja::Error> {
        let json = serde_json::to_value(&v)
            .map_err(|e| minijinja::Error::new(minijinja::ErrorKind::InvalidOperation, e.to_string()))?;
        Ok(py_literal(&json))
    });
    env.add_filter("tcl", |s: String| tcl_literal(&s));
    env.add_filter("ident", |s: String| ident(&s));
    for (name, source) in TEMPLATES {
        env.add_template(name, source).expect("bundled templates parse");
    }
    env
}

#[derive(Serialize)]
struct AreaCtx<'a> {
    id: &'static str,
    container: &'a str,
    geometry: crate::layout::Geometry,
}

#[derive(Serialize)]
struct WidgetCtx<'a> {
    id: &'a str,
    kind: &'static str,
    area: &'static str,
    geometry: crate::layout::Geometry,
    label: &'a str,
    label_width: Option<u32>,
    tooltip: Option<&'a str>,
    default: Option<&'a str>,
    choices: Option<&'a [String]>,
}

fn widget_contexts(spec: &GuiSpec) -> Vec<WidgetCtx<'_>> {
    let flags: BTreeMap<&str, &crate::flags::FlagSpec> = spec
        .flags
        .iter()
        .map(|b| (b.widget_id.as_str(), &b.flag))
        .chain(spec.update_flags.iter().map(|b| (b.widget_id.as_str(), &b.flag)))
        .collect();
    spec.widgets
        .iter()
        .map(|w| {
            let flag = flags.get(w.id.as_str());
            WidgetCtx {
                id: &w.id,
                kind: w.kind.as_str(),
                area: w.area.as_str(),
                geometry: w.geometry,
                label: &w.label,
                label_width: w.label_width,
                tooltip: w.tooltip.as_deref(),
                default: flag.map(|f| f.default.as_str()),
                choices: flag.filter(|f| !f.choices.is_empty()).map(|f| f.choices.as_slice()),
            }
        })
        .collect()
}

fn check_app_name(name: &str) -> Result<(), CodegenError> {
    let bad = name.is_empty()
        || name.starts_with('.')
        || name.chars().any(|c| matches!(c, '/' | '\\' | '\0') || c.is_control());
    if bad {
        return Err(CodegenError::BadAppName(name.to_owned()));
    }
    Ok(())
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Text of `MANIFEST.txt`: header comments, then one `<sha256>  <path>` line
/// per file in path order. The manifest's own line carries `-` as digest.
fn manifest_text(backend: BackendId, digest: &str, files: &BTreeMap<String, Vec<u8>>) -> String {
    let entry = backend.entry();
    let mut out = format!(
        "# gui-generator {}\n# backend: {}\n# spec-digest: {}\n",
        crate::GENERATOR_VERSION,
        entry.id,
        digest
    );
    let shared: Vec<&str> = REGISTRY
        .iter()
        .filter(|e| e.archive == entry.archive && e.backend != backend)
        .map(|e| e.id)
        .collect();
    if shared.is_empty() {
        out.push_str(&format!("# archive: {}\n", entry.archive));
    } else {
        out.push_str(&format!(
            "# archive: {} ({} when packaged together with {})\n",
            entry.archive,
            suffixed_archive(entry),
            shared.join(", ")
        ));
    }
    let mut paths: Vec<&str> = files.keys().map(String::as_str).chain([MANIFEST_FILE]).collect();
    paths.sort_unstable();
    for path in paths {
        match files.get(path) {
            Some(bytes) => out.push_str(&format!("{}  {path}\n", sha256_hex(bytes))),
            None => out.push_str(&format!("-  {path}\n")),
        }
    }
    out
}

fn suffixed_archive(entry: &BackendEntry) -> String {
    let stem = entry.archive.strip_suffix(".tar.gz").unwrap_or(entry.archive);
    format!("{stem}-{}.tar.gz", entry.collision_suffix)
}

/// Emit the file tree for `backend`. Pure: equal inputs give equal bytes.
pub fn generate(spec: &GuiSpec, backend: BackendId) -> Result<GeneratedTree, CodegenError> {
    let report = spec::validate(spec);
    if !report.is_clean() {
        return Err(CodegenError::SpecInvalid(report));
    }
    check_app_name(&spec.meta.app_name)?;
    let spec_json = spec::to_json(spec).map_err(|e| match e {
        spec::SpecError::Invalid(r) => CodegenError::SpecInvalid(r),
        other => CodegenError::Template {
            name: "spec".into(),
            message: other.to_string(),
        },
    })?;
    let digest = spec::digest(&spec_json);
    let spec_file = spec::file_name(spec);
    let entry = backend.entry();

    let areas: Vec<AreaCtx> = spec
        .areas
        .declared()
        .map(|(id, a)| AreaCtx {
            id: id.as_str(),
            container: &a.container,
            geometry: a.geometry,
        })
        .collect();
    let (w, h) = spec.areas.declared().fold((1, 1), |(w, h), (_, a)| {
        let g = a.geometry;
        (w.max(g.x + g.w), h.max(g.y + g.h))
    });
    let ctx = context! {
        app => &spec.meta.app_name,
        menu_title => &spec.meta.app_name,
        backend => entry.id,
        digest => &digest,
        version => crate::GENERATOR_VERSION,
        spec_file => &spec_file,
        engine_hint => entry.engine_hint,
        size => context! { w => w, h => h },
        areas => areas,
        widgets => widget_contexts(spec),
    };

    let env = environment();
    let mut files = BTreeMap::new();
    for (path, source) in entry.files {
        let bytes = match source {
            Source::Static(text) => text.as_bytes().to_vec(),
            Source::Template(name) => {
                let template = env.get_template(name).expect("registered template exists");
                template
                    .render(&ctx)
                    .map_err(|e| CodegenError::Template {
                        name: (*name).to_owned(),
                        message: format!("{e:#}"),
                    })?
                    .into_bytes()
            }
        };
        files.insert((*path).to_owned(), bytes);
    }
    files.insert(spec_file, spec_json.into_bytes());
    if let Some(hint) = entry.engine_hint {
        let config = serde_json::json!({ "engine_hint": hint, "spec_file": spec::file_name(spec) });
        let mut text = serde_json::to_string_pretty(&config).expect("json serializes");
        text.push('\n');
        files.insert(HOST_CONFIG_FILE.to_owned(), text.into_bytes());
    }
    let manifest = manifest_text(backend, &digest, &files);
    files.insert(MANIFEST_FILE.to_owned(), manifest.into_bytes());
    Ok(GeneratedTree { backend, files })
}

/// Top-level folder inside the archive: `<app>_<backend>` as an identifier,
/// so the pyqt archive unpacks to an importable package.
pub fn archive_root(tree: &GeneratedTree) -> String {
    let app = tree
        .files
        .keys()
        .find_map(|p| p.strip_suffix(".spec.json"))
        .unwrap_or("plugin");
    format!("{}_{}", ident(app), ident(tree.backend.as_str()))
}

/// Archive entries in order, as paths relative to the archive root.
pub fn archive_entries(archive: &[u8]) -> std::io::Result<Vec<String>> {
    let mut reader = tar::Archive::new(flate2::read::GzDecoder::new(archive));
    let mut out = Vec::new();
    for entry in reader.entries()? {
        let path = entry?.path()?.to_string_lossy().into_owned();
        let rel = path.split_once('/').map_or(path.as_str(), |(_, r)| r);
        out.push(rel.to_owned());
    }
    Ok(out)
}

/// Gzip tar of `tree` with zeroed timestamps and owners and fixed modes.
pub fn archive_bytes(tree: &GeneratedTree) -> Result<Vec<u8>, CodegenError> {
    if tree.files.is_empty() {
        return Err(CodegenError::EmptyTree);
    }
    let root = archive_root(tree);
    let build = || -> std::io::Result<Vec<u8>> {
        let gz = GzBuilder::new().mtime(0).write(Vec::new(), Compression::best());
        let mut builder = tar::Builder::new(gz);
        for (path, bytes) in &tree.files {
            let mut header = tar::Header::new_gnu();
            header.set_size(bytes.len() as u64);
            header.set_mode(0o644);
            header.set_mtime(0);
            header.set_uid(0);
            header.set_gid(0);
            header.set_entry_type(tar::EntryType::Regular);
            builder.append_data(&mut header, format!("{root}/{path}"), bytes.as_slice())?;
        }
        builder.into_inner()?.finish()
    };
    build().map_err(io_err(Path::new(&root)))
}

fn write_tree(tree: &GeneratedTree, dir: &Path) -> Result<(), CodegenError> {
    if dir.exists() {
        let generated = dir.join(MANIFEST_FILE).is_file();
        let empty = fs::read_dir(dir).map_err(io_err(dir))?.next().is_none();
        if !generated && !empty {
            return Err(CodegenError::OutputOccupied(dir.to_path_buf()));
        }
        fs::remove_dir_all(dir).map_err(io_err(dir))?;
    }
    for (rel, bytes) in &tree.files {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        fs::write(&path, bytes).map_err(io_err(&path))?;
    }
    Ok(())
}

fn write_archive(tree: &GeneratedTree, path: &Path) -> Result<(), CodegenError> {
    let bytes = archive_bytes(tree)?;
    let mut file = fs::File::create(path).map_err(io_err(path))?;
    file.write_all(&bytes).map_err(io_err(path))
}

/// Write `tree` under `out_dir/<backend>/` and its archive into `out_dir`.
/// Returns the archive path.
pub fn package(tree: &GeneratedTree, out_dir: &Path) -> Result<PathBuf, CodegenError> {
    package_as(tree, out_dir, tree.backend.archive_name())
}

fn package_as(tree: &GeneratedTree, out_dir: &Path, archive: &str) -> Result<PathBuf, CodegenError> {
    if tree.files.is_empty() {
        return Err(CodegenError::EmptyTree);
    }
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    write_tree(tree, &out_dir.join(tree.backend.as_str()))?;
    let path = out_dir.join(archive);
    write_archive(tree, &path)?;
    Ok(path)
}

/// Archive names for backends packaged together. The first backend (in
/// registry order) keeps a shared name; the others get their suffix.
pub fn archive_names(backends: &[BackendId]) -> Result<BTreeMap<BackendId, String>, CodegenError> {
    let mut sorted = backends.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(CodegenError::DuplicateBackend(w[0]));
    }
    let mut taken: BTreeMap<&str, BackendId> = BTreeMap::new();
    let mut names = BTreeMap::new();
    for b in sorted {
        let entry = b.entry();
        let name = if taken.contains_key(entry.archive) {
            suffixed_archive(entry)
        } else {
            taken.insert(entry.archive, b);
            entry.archive.to_owned()
        };
        names.insert(b, name);
    }
    Ok(names)
}

/// Package several trees into one output directory, resolving archive name
/// collisions. Returns archive paths in input order.
pub fn package_all(trees: &[GeneratedTree], out_dir: &Path) -> Result<Vec<PathBuf>, CodegenError> {
    let backends: Vec<BackendId> = trees.iter().map(|t| t.backend).collect();
    let names = archive_names(&backends)?;
    trees.iter().map(|t| package_as(t, out_dir, &names[&t.backend])).collect()
}

/// Widget ids instantiated by a generated view, in source order.
pub fn view_widget_ids(view_source: &str) -> Vec<String> {
    const CALL: &str = "self._add(";
    view_source
        .lines()
        .filter_map(|l| l.trim_start().strip_prefix(CALL))
        .filter_map(|rest| {
            let mut de = serde_json::Deserializer::from_str(rest).into_iter::<String>();
            de.next().and_then(Result::ok)
        })
        .collect()
}
