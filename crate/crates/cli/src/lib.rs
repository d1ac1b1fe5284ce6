//! The generator pipeline behind `gui-generator`: layout and flag files in,
//! a formal spec and packaged plugin trees out.

use std::path::{Path, PathBuf};

use clap::Parser;
use guigen_core::builder::build_spec;
use guigen_core::codegen::{self, BackendId, CodegenError, GeneratedTree};
use guigen_core::flags::{parse_input_flags, parse_update_flags, FlagError};
use guigen_core::layout::{classify_areas, parse_ui, LayoutError};
use guigen_core::spec::{self, MetaBlock, SpecError};
use thiserror::Error;

pub const DEFAULT_GUI_OUTPUT: &str = "generated_plugins";
pub const STEP1_DIR: &str = "step1_design";
pub const STEP2_DIR: &str = "step2_formal_spec";

/// Generate GUI plugins for a command-line tool from a designer layout and
/// flag catalogs.
#[derive(Debug, Clone, Parser)]
#[command(name = "gui-generator", version)]
pub struct Args {
    /// Designer layout (.ui).
    #[arg(long, value_name = "PATH")]
    pub ui: PathBuf,
    /// Executable wrapped by the plugin.
    #[arg(long, value_name = "NAME")]
    pub exe: String,
    /// Input-area flag catalog.
    #[arg(long, value_name = "PATH")]
    pub flags: PathBuf,
    /// Update-area flag catalog.
    #[arg(long, value_name = "PATH")]
    pub update_flags: Option<PathBuf>,
    /// Post-analysis script run after the executable.
    #[arg(long, value_name = "PATH")]
    pub post_script: String,
    /// Backends to generate: pyqt, tkinter, panel-ngljs, panel-threejs.
    #[arg(long, value_name = "ID", num_args = 1.., required_unless_present = "spec_only", value_parser = parse_backend)]
    pub format: Vec<BackendId>,
    /// Directory receiving one tree per backend and the archives.
    #[arg(long, value_name = "DIR", default_value = DEFAULT_GUI_OUTPUT)]
    pub gui_output: PathBuf,
    /// Stop after writing the formal spec.
    #[arg(long)]
    pub spec_only: bool,
    /// Plugin name; defaults to the executable's file stem.
    #[arg(long, value_name = "NAME")]
    pub app_name: Option<String>,
    /// Directory for `<app>.spec.json`. Defaults to `step2_formal_spec/`
    /// beside the layout's `step1_design/` folder, else in the working
    /// directory.
    #[arg(long, value_name = "DIR")]
    pub spec_output: Option<PathBuf>,
}

fn parse_backend(s: &str) -> Result<BackendId, String> {
    s.parse().map_err(|e: CodegenError| e.to_string())
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("--format {0} given twice")]
    DuplicateFormat(BackendId),
    #[error("{}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{}: layout-parser: {source}", path.display())]
    Layout { path: PathBuf, source: LayoutError },
    #[error("{}: flag-catalog: {source}", path.display())]
    Flags { path: PathBuf, source: FlagError },
    #[error("spec-builder: {0}")]
    Build(#[from] guigen_core::builder::BuildError),
    #[error("gui-spec: {0}")]
    Spec(#[from] SpecError),
    #[error("codegen: {0}")]
    Codegen(#[from] CodegenError),
}

impl CliError {
    /// 2 for usage errors, 1 for everything the pipeline rejects.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::DuplicateFormat(_) => 2,
            _ => 1,
        }
    }
}

/// What a run wrote.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub spec_path: PathBuf,
    pub digest: String,
    /// `(backend, tree directory, archive)` in `--format` order.
    pub outputs: Vec<(BackendId, PathBuf, PathBuf)>,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })
}

fn default_app_name(exe: &str) -> String {
    let name = exe.rsplit(['/', '\\']).next().unwrap_or(exe);
    match name.rsplit_once('.') {
        Some((stem, _)) if !stem.is_empty() => stem.to_owned(),
        _ => name.to_owned(),
    }
}

/// Where the step2 spec goes when `--spec-output` is not given.
pub fn default_spec_dir(ui: &Path) -> PathBuf {
    let parent = ui.parent().filter(|p| !p.as_os_str().is_empty());
    match parent {
        Some(dir) if dir.file_name().is_some_and(|n| n == STEP1_DIR) => {
            dir.parent().unwrap_or(Path::new("")).join(STEP2_DIR)
        }
        _ => PathBuf::from(STEP2_DIR),
    }
}

pub fn run(args: &Args) -> Result<Report, CliError> {
    for (i, b) in args.format.iter().enumerate() {
        if args.format[..i].contains(b) {
            return Err(CliError::DuplicateFormat(*b));
        }
    }

    let layout_text = read(&args.ui)?;
    let layout_err = |source| CliError::Layout {
        path: args.ui.clone(),
        source,
    };
    let tree = parse_ui(&layout_text).map_err(layout_err)?;
    let areas = classify_areas(&tree).map_err(layout_err)?;
    let flags = parse_input_flags(&read(&args.flags)?).map_err(|source| CliError::Flags {
        path: args.flags.clone(),
        source,
    })?;
    let update = match &args.update_flags {
        Some(path) => parse_update_flags(&read(path)?).map_err(|source| CliError::Flags {
            path: path.clone(),
            source,
        })?,
        None => Vec::new(),
    };
    let app = args.app_name.clone().unwrap_or_else(|| default_app_name(&args.exe));
    let meta = MetaBlock::new(app, args.exe.clone(), args.post_script.clone());
    let spec = build_spec(&tree, &areas, &flags, &update, meta)?;
    let json = spec::to_json(&spec)?;

    let spec_dir = args.spec_output.clone().unwrap_or_else(|| default_spec_dir(&args.ui));
    let spec_path = spec_dir.join(spec::file_name(&spec));
    let write_err = |path: &Path| {
        let path = path.to_owned();
        move |source| CliError::Write { path, source }
    };
    std::fs::create_dir_all(&spec_dir).map_err(write_err(&spec_dir))?;
    std::fs::write(&spec_path, &json).map_err(write_err(&spec_path))?;
    let mut report = Report {
        spec_path,
        digest: spec::digest(&json),
        outputs: Vec::new(),
    };
    if args.spec_only {
        return Ok(report);
    }

    // Codegen is pure, so backends render in parallel.
    let trees: Vec<GeneratedTree> = std::thread::scope(|s| {
        let handles: Vec<_> = args
            .format
            .iter()
            .map(|&b| {
                let spec = &spec;
                s.spawn(move || codegen::generate(spec, b))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("codegen thread panicked")).collect::<Vec<_>>()
    })
    .into_iter()
    .collect::<Result<_, _>>()?;
    let archives = codegen::package_all(&trees, &args.gui_output)?;
    report.outputs = trees
        .iter()
        .zip(archives)
        .map(|(t, a)| (t.backend, args.gui_output.join(t.backend.as_str()), a))
        .collect();
    Ok(report)
}
