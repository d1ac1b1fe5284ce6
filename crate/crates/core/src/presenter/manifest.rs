//! The artifact manifest written by post-analysis (`<out-dir>/manifest.json`).

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Component, Path};

use serde::{Deserialize, Serialize};

use super::PresenterError;
use crate::spec::{GuiSpec, MediaKind};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineHint {
    Molecular,
    Mesh,
}

impl EngineHint {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Molecular => "molecular",
            Self::Mesh => "mesh",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotArtifact {
    pub media: MediaKind,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewerArtifact {
    pub engine_hint: EngineHint,
    pub path: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactManifest {
    #[serde(default)]
    pub slots: BTreeMap<String, SlotArtifact>,
    #[serde(default)]
    pub viewer: Vec<ViewerArtifact>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ManifestCode {
    Malformed,
    UnknownSlot,
    PathEscape,
    MediaMismatch,
    MissingArtifact,
}

impl fmt::Display for ManifestCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Malformed => "MALFORMED",
            Self::UnknownSlot => "UNKNOWN_SLOT",
            Self::PathEscape => "PATH_ESCAPE",
            Self::MediaMismatch => "MEDIA_MISMATCH",
            Self::MissingArtifact => "MISSING_ARTIFACT",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestViolation {
    pub code: ManifestCode,
    pub detail: String,
}

impl fmt::Display for ManifestViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.detail)
    }
}

/// True when `path` is a plain relative path that cannot leave its base
/// directory lexically.
pub fn is_contained(path: &str) -> bool {
    !path.is_empty()
        && !path.contains('\\')
        && Path::new(path)
            .components()
            .all(|c| matches!(c, Component::Normal(_) | Component::CurDir))
}

/// Lexical containment plus, for paths that exist, a canonical-path check so
/// symlinks cannot point outside `base`.
pub fn resolve_within(base: &Path, path: &str) -> Option<std::path::PathBuf> {
    if !is_contained(path) {
        return None;
    }
    let joined = base.join(path);
    match (joined.canonicalize(), base.canonicalize()) {
        (Ok(full), Ok(root)) if full.starts_with(&root) => Some(full),
        (Ok(_), Ok(_)) => None,
        _ => Some(joined),
    }
}

impl ArtifactManifest {
    /// Read `<out_dir>/manifest.json` and check it against the spec.
    pub fn load(out_dir: &Path, spec: &GuiSpec) -> Result<Self, PresenterError> {
        let file = out_dir.join(MANIFEST_FILE);
        let text = match std::fs::read_to_string(&file) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(PresenterError::ManifestMissing(file.display().to_string()))
            }
            Err(e) => return Err(PresenterError::Io(format!("{}: {e}", file.display()))),
        };
        let manifest: Self = serde_json::from_str(&text).map_err(|e| {
            PresenterError::ManifestInvalid(vec![ManifestViolation {
                code: ManifestCode::Malformed,
                detail: e.to_string(),
            }])
        })?;
        let violations = manifest.check(out_dir, spec);
        if violations.is_empty() {
            Ok(manifest)
        } else {
            Err(PresenterError::ManifestInvalid(violations))
        }
    }

    pub fn check(&self, out_dir: &Path, spec: &GuiSpec) -> Vec<ManifestViolation> {
        let mut out = Vec::new();
        for (name, artifact) in &self.slots {
            match spec.slot(name) {
                None => out.push(violation(
                    ManifestCode::UnknownSlot,
                    format!("slot `{name}` is not declared by the spec"),
                )),
                Some(slot) if slot.media != artifact.media => out.push(violation(
                    ManifestCode::MediaMismatch,
                    format!("slot `{name}` shows {}, manifest says {}", slot.media.as_str(), artifact.media.as_str()),
                )),
                Some(_) => {}
            }
            check_path(out_dir, &format!("slot `{name}`"), &artifact.path, &mut out);
        }
        for (i, v) in self.viewer.iter().enumerate() {
            check_path(out_dir, &format!("viewer[{i}]"), &v.path, &mut out);
        }
        out
    }
}

fn violation(code: ManifestCode, detail: String) -> ManifestViolation {
    ManifestViolation { code, detail }
}

fn check_path(base: &Path, what: &str, path: &str, out: &mut Vec<ManifestViolation>) {
    match resolve_within(base, path) {
        None => out.push(violation(
            ManifestCode::PathEscape,
            format!("{what}: `{path}` leaves the output directory"),
        )),
        Some(p) if !p.is_file() => out.push(violation(
            ManifestCode::MissingArtifact,
            format!("{what}: `{path}` does not exist"),
        )),
        Some(_) => {}
    }
}
