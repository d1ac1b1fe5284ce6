//! The platform-agnostic GUI specification (`sblspec/1`).
//!
//! A [`GuiSpec`] is the single source of truth consumed by every code
//! generator and by the presenter. Its canonical JSON form has keys in
//! declaration order, lists in spec order, two-space indentation and a
//! trailing newline, so equal specs serialize to identical bytes.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::flags::{FlagKind, FlagProblem, FlagSpec, RefreshTarget};
use crate::layout::Geometry;

pub const SCHEMA_VERSION: &str = "sblspec/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuiSpec {
    pub meta: MetaBlock,
    pub areas: AreaBlock,
    pub widgets: Vec<WidgetSpec>,
    pub flags: Vec<FlagBinding>,
    pub update_flags: Vec<UpdateBinding>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaBlock {
    pub app_name: String,
    pub exe: String,
    pub post_script: String,
    pub schema: String,
    pub generator_version: String,
}

impl MetaBlock {
    pub fn new(app_name: impl Into<String>, exe: impl Into<String>, post_script: impl Into<String>) -> Self {
        Self {
            app_name: app_name.into(),
            exe: exe.into(),
            post_script: post_script.into(),
            schema: SCHEMA_VERSION.to_owned(),
            generator_version: crate::GENERATOR_VERSION.to_owned(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AreaId {
    Input,
    Output,
    Update,
    Viewer,
}

impl AreaId {
    pub const ALL: [AreaId; 4] = [Self::Input, Self::Output, Self::Update, Self::Viewer];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Input => "input",
            Self::Output => "output",
            Self::Update => "update",
            Self::Viewer => "viewer",
        }
    }
}

impl fmt::Display for AreaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<crate::layout::AreaSlot> for AreaId {
    fn from(s: crate::layout::AreaSlot) -> Self {
        use crate::layout::AreaSlot;
        match s {
            AreaSlot::Input => Self::Input,
            AreaSlot::Output => Self::Output,
            AreaSlot::Update => Self::Update,
            AreaSlot::Viewer => Self::Viewer,
        }
    }
}

/// A declared area: the layout container it came from and its rectangle
/// relative to the layout root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaSpec {
    pub container: String,
    pub geometry: Geometry,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaBlock {
    pub input: AreaSpec,
    pub output: AreaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub update: Option<AreaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub viewer: Option<AreaSpec>,
}

impl AreaBlock {
    pub fn get(&self, id: AreaId) -> Option<&AreaSpec> {
        match id {
            AreaId::Input => Some(&self.input),
            AreaId::Output => Some(&self.output),
            AreaId::Update => self.update.as_ref(),
            AreaId::Viewer => self.viewer.as_ref(),
        }
    }

    pub fn declared(&self) -> impl Iterator<Item = (AreaId, &AreaSpec)> {
        AreaId::ALL.into_iter().filter_map(|id| self.get(id).map(|a| (id, a)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidgetKind {
    Checkbox,
    LineEntry,
    FilePicker,
    IntSpin,
    FloatSpin,
    Combo,
    RunButton,
    Label,
    TextOutput,
    ImageOutput,
    TableOutput,
    HtmlOutput,
    PdfOutput,
    ViewerFrame,
    StatusBar,
}

impl WidgetKind {
    pub const ALL: [WidgetKind; 15] = [
        Self::Checkbox,
        Self::LineEntry,
        Self::FilePicker,
        Self::IntSpin,
        Self::FloatSpin,
        Self::Combo,
        Self::RunButton,
        Self::Label,
        Self::TextOutput,
        Self::ImageOutput,
        Self::TableOutput,
        Self::HtmlOutput,
        Self::PdfOutput,
        Self::ViewerFrame,
        Self::StatusBar,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Checkbox => "checkbox",
            Self::LineEntry => "line_entry",
            Self::FilePicker => "file_picker",
            Self::IntSpin => "int_spin",
            Self::FloatSpin => "float_spin",
            Self::Combo => "combo",
            Self::RunButton => "run_button",
            Self::Label => "label",
            Self::TextOutput => "text_output",
            Self::ImageOutput => "image_output",
            Self::TableOutput => "table_output",
            Self::HtmlOutput => "html_output",
            Self::PdfOutput => "pdf_output",
            Self::ViewerFrame => "viewer_frame",
            Self::StatusBar => "status_bar",
        }
    }

    /// Widget kind a flag of `kind` is rendered as.
    pub fn for_flag(kind: FlagKind) -> Self {
        match kind {
            FlagKind::Bool => Self::Checkbox,
            FlagKind::Int => Self::IntSpin,
            FlagKind::Float => Self::FloatSpin,
            FlagKind::String => Self::LineEntry,
            FlagKind::Infile => Self::FilePicker,
            FlagKind::Enum => Self::Combo,
        }
    }

    /// The media shown by an output kind.
    pub fn output_media(self) -> Option<MediaKind> {
        Some(match self {
            Self::TextOutput => MediaKind::Text,
            Self::ImageOutput => MediaKind::Image,
            Self::TableOutput => MediaKind::Table,
            Self::HtmlOutput => MediaKind::Html,
            Self::PdfOutput => MediaKind::Pdf,
            _ => return None,
        })
    }

    pub fn is_output(self) -> bool {
        self.output_media().is_some()
    }
}

impl fmt::Display for WidgetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MediaKind {
    Text,
    Image,
    Table,
    Html,
    Pdf,
}

impl MediaKind {
    pub const ALL: [MediaKind; 5] = [Self::Text, Self::Image, Self::Table, Self::Html, Self::Pdf];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Text => "text",
            Self::Image => "image",
            Self::Table => "table",
            Self::Html => "html",
            Self::Pdf => "pdf",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }

    pub fn widget_kind(self) -> WidgetKind {
        match self {
            Self::Text => WidgetKind::TextOutput,
            Self::Image => WidgetKind::ImageOutput,
            Self::Table => WidgetKind::TableOutput,
            Self::Html => WidgetKind::HtmlOutput,
            Self::Pdf => WidgetKind::PdfOutput,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSlot {
    pub slot_name: String,
    pub media: MediaKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WidgetSpec {
    pub id: String,
    pub kind: WidgetKind,
    pub area: AreaId,
    pub geometry: Geometry,
    pub label: String,
    /// When set, views draw `label` in a column of this width at the left
    /// edge of `geometry` and place the control in the remaining space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_width: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tooltip: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot: Option<OutputSlot>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlagBinding {
    pub flag: FlagSpec,
    pub widget_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpdateBinding {
    pub flag: FlagSpec,
    pub refresh: BTreeSet<RefreshTarget>,
    pub widget_id: String,
}

impl GuiSpec {
    pub fn widget(&self, id: &str) -> Option<&WidgetSpec> {
        self.widgets.iter().find(|w| w.id == id)
    }

    pub fn output_slots(&self) -> impl Iterator<Item = (&WidgetSpec, &OutputSlot)> {
        self.widgets.iter().filter_map(|w| w.slot.as_ref().map(|s| (w, s)))
    }

    pub fn slot(&self, slot_name: &str) -> Option<&OutputSlot> {
        self.output_slots().map(|(_, s)| s).find(|s| s.slot_name == slot_name)
    }

    pub fn flag_for_widget(&self, widget_id: &str) -> Option<&FlagBinding> {
        self.flags.iter().find(|b| b.widget_id == widget_id)
    }

    pub fn update_flag(&self, token: &str) -> Option<&UpdateBinding> {
        self.update_flags.iter().find(|b| b.flag.token == token)
    }

    pub fn widget_ids(&self) -> Vec<&str> {
        self.widgets.iter().map(|w| w.id.as_str()).collect()
    }
}

/// Machine-readable violation classes, one per spec invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    SchemaMismatch,
    EmptyExe,
    EmptyPostScript,
    DuplicateAreaContainer,
    InvalidGeometry,
    DuplicateWidgetId,
    UndeclaredArea,
    OutputOutsideOutputArea,
    ViewerOutsideViewerArea,
    RunButtonCount,
    RunButtonOutsideInput,
    SlotPresence,
    SlotMediaMismatch,
    DuplicateSlot,
    DanglingWidgetRef,
    BindingAreaMismatch,
    BindingKindMismatch,
    DuplicateBinding,
    BadToken,
    DuplicateToken,
    TokenOverlap,
    BadBoolDefault,
    BadNumericDefault,
    BadEnumChoices,
    BadEnumDefault,
    EmptyRefresh,
}

impl ViolationCode {
    pub const ALL: [ViolationCode; 26] = [
        Self::SchemaMismatch,
        Self::EmptyExe,
        Self::EmptyPostScript,
        Self::DuplicateAreaContainer,
        Self::InvalidGeometry,
        Self::DuplicateWidgetId,
        Self::UndeclaredArea,
        Self::OutputOutsideOutputArea,
        Self::ViewerOutsideViewerArea,
        Self::RunButtonCount,
        Self::RunButtonOutsideInput,
        Self::SlotPresence,
        Self::SlotMediaMismatch,
        Self::DuplicateSlot,
        Self::DanglingWidgetRef,
        Self::BindingAreaMismatch,
        Self::BindingKindMismatch,
        Self::DuplicateBinding,
        Self::BadToken,
        Self::DuplicateToken,
        Self::TokenOverlap,
        Self::BadBoolDefault,
        Self::BadNumericDefault,
        Self::BadEnumChoices,
        Self::BadEnumDefault,
        Self::EmptyRefresh,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::SchemaMismatch => "SCHEMA_MISMATCH",
            Self::EmptyExe => "EMPTY_EXE",
            Self::EmptyPostScript => "EMPTY_POST_SCRIPT",
            Self::DuplicateAreaContainer => "DUPLICATE_AREA_CONTAINER",
            Self::InvalidGeometry => "INVALID_GEOMETRY",
            Self::DuplicateWidgetId => "DUPLICATE_WIDGET_ID",
            Self::UndeclaredArea => "UNDECLARED_AREA",
            Self::OutputOutsideOutputArea => "OUTPUT_OUTSIDE_OUTPUT_AREA",
            Self::ViewerOutsideViewerArea => "VIEWER_OUTSIDE_VIEWER_AREA",
            Self::RunButtonCount => "RUN_BUTTON_COUNT",
            Self::RunButtonOutsideInput => "RUN_BUTTON_OUTSIDE_INPUT",
            Self::SlotPresence => "SLOT_PRESENCE",
            Self::SlotMediaMismatch => "SLOT_MEDIA_MISMATCH",
            Self::DuplicateSlot => "DUPLICATE_SLOT",
            Self::DanglingWidgetRef => "DANGLING_WIDGET_REF",
            Self::BindingAreaMismatch => "BINDING_AREA_MISMATCH",
            Self::BindingKindMismatch => "BINDING_KIND_MISMATCH",
            Self::DuplicateBinding => "DUPLICATE_BINDING",
            Self::BadToken => "BAD_TOKEN",
            Self::DuplicateToken => "DUPLICATE_TOKEN",
            Self::TokenOverlap => "TOKEN_OVERLAP",
            Self::BadBoolDefault => "BAD_BOOL_DEFAULT",
            Self::BadNumericDefault => "BAD_NUMERIC_DEFAULT",
            Self::BadEnumChoices => "BAD_ENUM_CHOICES",
            Self::BadEnumDefault => "BAD_ENUM_DEFAULT",
            Self::EmptyRefresh => "EMPTY_REFRESH",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    /// JSON pointer into the spec.
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn codes(&self) -> Vec<ViolationCode> {
        self.violations.iter().map(|v| v.code).collect()
    }

    fn push(&mut self, code: ViolationCode, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            code,
            path: path.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{} at {}: {}", v.code, v.path, v.message)?;
        }
        Ok(())
    }
}

/// Check every spec invariant. Violations are data; this never fails.
pub fn validate(spec: &GuiSpec) -> ValidationReport {
    use ViolationCode as C;
    let mut r = ValidationReport::default();

    let meta = &spec.meta;
    if meta.schema != SCHEMA_VERSION {
        r.push(C::SchemaMismatch, "/meta/schema", format!("expected `{SCHEMA_VERSION}`, found `{}`", meta.schema));
    }
    if meta.exe.trim().is_empty() {
        r.push(C::EmptyExe, "/meta/exe", "executable name is empty");
    }
    if meta.post_script.trim().is_empty() {
        r.push(C::EmptyPostScript, "/meta/post_script", "post-analysis script is empty");
    }

    let mut containers = HashSet::new();
    for (id, area) in spec.areas.declared() {
        let path = format!("/areas/{id}");
        if !containers.insert(area.container.as_str()) {
            r.push(C::DuplicateAreaContainer, format!("{path}/container"), format!("`{}` backs two areas", area.container));
        }
        if !area.geometry.is_valid() {
            r.push(C::InvalidGeometry, format!("{path}/geometry"), "width and height must be at least 1");
        }
    }

    let mut ids = HashSet::new();
    let mut slots = HashSet::new();
    let mut run_buttons = 0;
    for (i, w) in spec.widgets.iter().enumerate() {
        let path = format!("/widgets/{i}");
        if !ids.insert(w.id.as_str()) {
            r.push(C::DuplicateWidgetId, format!("{path}/id"), format!("`{}` already used", w.id));
        }
        if !w.geometry.is_valid() {
            r.push(C::InvalidGeometry, format!("{path}/geometry"), "width and height must be at least 1");
        }
        if spec.areas.get(w.area).is_none() {
            r.push(C::UndeclaredArea, format!("{path}/area"), format!("area `{}` is not declared", w.area));
        }
        if w.kind.is_output() && w.area != AreaId::Output {
            r.push(C::OutputOutsideOutputArea, format!("{path}/area"), format!("{} must sit in the output area", w.kind));
        }
        if w.kind == WidgetKind::ViewerFrame && w.area != AreaId::Viewer {
            r.push(C::ViewerOutsideViewerArea, format!("{path}/area"), "viewer_frame must sit in the viewer area");
        }
        if w.kind == WidgetKind::RunButton {
            run_buttons += 1;
            if w.area != AreaId::Input {
                r.push(C::RunButtonOutsideInput, format!("{path}/area"), "run_button must sit in the input area");
            }
        }
        match (&w.slot, w.kind.output_media()) {
            (Some(_), None) | (None, Some(_)) => {
                r.push(C::SlotPresence, format!("{path}/slot"), "slot is required on output kinds and forbidden elsewhere")
            }
            (Some(slot), Some(media)) => {
                if slot.media != media {
                    r.push(
                        C::SlotMediaMismatch,
                        format!("{path}/slot/media"),
                        format!("{} shows {}, slot declares {}", w.kind, media.as_str(), slot.media.as_str()),
                    );
                }
                if !slots.insert(slot.slot_name.as_str()) {
                    r.push(C::DuplicateSlot, format!("{path}/slot/slot_name"), format!("slot `{}` already used", slot.slot_name));
                }
            }
            (None, None) => {}
        }
    }
    if run_buttons != 1 {
        r.push(C::RunButtonCount, "/widgets", format!("expected exactly one run_button, found {run_buttons}"));
    }

    let by_id: HashMap<&str, &WidgetSpec> = spec.widgets.iter().map(|w| (w.id.as_str(), w)).collect();
    let mut bound = HashSet::new();
    let bindings = spec
        .flags
        .iter()
        .enumerate()
        .map(|(i, b)| (format!("/flags/{i}"), &b.flag, b.widget_id.as_str(), AreaId::Input, None))
        .chain(spec.update_flags.iter().enumerate().map(|(i, b)| {
            (format!("/update_flags/{i}"), &b.flag, b.widget_id.as_str(), AreaId::Update, Some(&b.refresh))
        }));
    let mut input_tokens = HashSet::new();
    let mut update_tokens = HashSet::new();
    for (path, flag, widget_id, area, refresh) in bindings {
        check_flag(&mut r, &path, flag);
        let tokens = if area == AreaId::Input { &mut input_tokens } else { &mut update_tokens };
        if !tokens.insert(flag.token.as_str()) {
            r.push(C::DuplicateToken, format!("{path}/flag/token"), format!("`{}` listed twice", flag.token));
        } else if area == AreaId::Update && input_tokens.contains(flag.token.as_str()) {
            r.push(C::TokenOverlap, format!("{path}/flag/token"), format!("`{}` is also an input flag", flag.token));
        }
        if refresh.is_some_and(BTreeSet::is_empty) {
            r.push(C::EmptyRefresh, format!("{path}/refresh"), "update flags must refresh outputs and/or viewer");
        }
        if !bound.insert(widget_id) {
            r.push(C::DuplicateBinding, format!("{path}/widget_id"), format!("`{widget_id}` is bound twice"));
        }
        match by_id.get(widget_id) {
            None => r.push(C::DanglingWidgetRef, format!("{path}/widget_id"), format!("no widget `{widget_id}`")),
            Some(w) => {
                if w.area != area {
                    r.push(
                        C::BindingAreaMismatch,
                        format!("{path}/widget_id"),
                        format!("`{widget_id}` is in the {} area, expected {area}", w.area),
                    );
                }
                let expected = WidgetKind::for_flag(flag.kind);
                if w.kind != expected {
                    r.push(
                        C::BindingKindMismatch,
                        format!("{path}/widget_id"),
                        format!("{} flag needs a {expected}, `{widget_id}` is a {}", flag.kind, w.kind),
                    );
                }
            }
        }
    }
    r
}

fn check_flag(r: &mut ValidationReport, path: &str, flag: &FlagSpec) {
    if let Err(problem) = flag.check() {
        let (code, field) = match problem {
            FlagProblem::Token => (ViolationCode::BadToken, "token"),
            FlagProblem::EnumChoices => (ViolationCode::BadEnumChoices, "choices"),
            FlagProblem::EnumDefault => (ViolationCode::BadEnumDefault, "default"),
            FlagProblem::BoolDefault => (ViolationCode::BadBoolDefault, "default"),
            FlagProblem::NumericDefault => (ViolationCode::BadNumericDefault, "default"),
        };
        r.push(code, format!("{path}/flag/{field}"), problem.to_string());
    }
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("JSON syntax: {0}")]
    JsonSyntax(String),
    #[error("unsupported schema `{found}` (expected `{SCHEMA_VERSION}`)")]
    SchemaMismatch { found: String },
    #[error("spec shape: {0}")]
    Shape(String),
    #[error("invalid spec: {0}")]
    Invalid(ValidationReport),
}

/// Canonical JSON. Fails if the spec does not validate.
pub fn to_json(spec: &GuiSpec) -> Result<String, SpecError> {
    let report = validate(spec);
    if !report.is_clean() {
        return Err(SpecError::Invalid(report));
    }
    let mut text = serde_json::to_string_pretty(spec).map_err(|e| SpecError::Shape(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Parse and validate a spec document.
pub fn from_json(text: &str) -> Result<GuiSpec, SpecError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| SpecError::JsonSyntax(e.to_string()))?;
    match value.pointer("/meta/schema").and_then(|v| v.as_str()) {
        Some(SCHEMA_VERSION) => {}
        other => {
            return Err(SpecError::SchemaMismatch {
                found: other.unwrap_or("<missing>").to_owned(),
            })
        }
    }
    let spec: GuiSpec = serde_json::from_value(value).map_err(|e| SpecError::Shape(e.to_string()))?;
    let report = validate(&spec);
    if report.is_clean() {
        Ok(spec)
    } else {
        Err(SpecError::Invalid(report))
    }
}

/// `sha256:<hex>` of the canonical JSON text.
pub fn digest(canonical_json: &str) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(canonical_json.as_bytes())))
}

/// Conventional file name of a spec: `<app_name>.spec.json`.
pub fn file_name(spec: &GuiSpec) -> String {
    format!("{}.spec.json", spec.meta.app_name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> GuiSpec {
        GuiSpec {
            meta: MetaBlock::new("demo", "demo.exe", "post.py"),
            areas: AreaBlock {
                input: AreaSpec {
                    container: "area_input".into(),
                    geometry: Geometry::new(0, 0, 300, 200),
                },
                output: AreaSpec {
                    container: "area_output".into(),
                    geometry: Geometry::new(300, 0, 300, 200),
                },
                update: None,
                viewer: None,
            },
            widgets: vec![
                WidgetSpec {
                    id: "run".into(),
                    kind: WidgetKind::RunButton,
                    area: AreaId::Input,
                    geometry: Geometry::new(10, 10, 100, 24),
                    label: "Run".into(),
                    label_width: None,
                    tooltip: None,
                    slot: None,
                },
                WidgetSpec {
                    id: "out_text_log".into(),
                    kind: WidgetKind::TextOutput,
                    area: AreaId::Output,
                    geometry: Geometry::new(10, 10, 200, 100),
                    label: "log".into(),
                    label_width: None,
                    tooltip: None,
                    slot: Some(OutputSlot {
                        slot_name: "log".into(),
                        media: MediaKind::Text,
                    }),
                },
            ],
            flags: vec![],
            update_flags: vec![],
        }
    }

    #[test]
    fn minimal_spec_is_clean() {
        assert!(validate(&minimal()).is_clean());
    }

    #[test]
    fn dangling_widget_ref() {
        let mut spec = minimal();
        spec.flags.push(FlagBinding {
            flag: FlagSpec::new("--verbose", FlagKind::Bool, "", "verbose"),
            widget_id: "nope".into(),
        });
        let report = validate(&spec);
        assert_eq!(report.codes(), vec![ViolationCode::DanglingWidgetRef]);
        assert_eq!(report.violations[0].path, "/flags/0/widget_id");
    }

    #[test]
    fn no_update_area_serialization() {
        let text = to_json(&minimal()).unwrap();
        assert!(text.contains("\"update_flags\": []"));
        assert!(!text.contains("\"update\""));
        assert!(text.ends_with("}\n"));
        assert!(text.starts_with("{\n  \"meta\": {\n    \"app_name\""));
    }

    #[test]
    fn round_trip_bytes() {
        let text = to_json(&minimal()).unwrap();
        let back = from_json(&text).unwrap();
        assert_eq!(back, minimal());
        assert_eq!(to_json(&back).unwrap(), text);
    }

    #[test]
    fn schema_mismatch_on_load() {
        let text = to_json(&minimal()).unwrap().replace(SCHEMA_VERSION, "sblspec/9");
        assert!(matches!(from_json(&text), Err(SpecError::SchemaMismatch { found }) if found == "sblspec/9"));
    }

    #[test]
    fn json_syntax_error() {
        assert!(matches!(from_json("{"), Err(SpecError::JsonSyntax(_))));
    }

    #[test]
    fn invalid_spec_on_load() {
        let mut spec = minimal();
        spec.widgets[0].area = AreaId::Output;
        let text = serde_json::to_string(&spec).unwrap();
        match from_json(&text) {
            Err(SpecError::Invalid(r)) => assert_eq!(r.codes(), vec![ViolationCode::RunButtonOutsideInput]),
            other => panic!("{other:?}"),
        }
        assert!(matches!(to_json(&spec), Err(SpecError::Invalid(_))));
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = to_json(&minimal()).unwrap().replacen("\"widgets\"", "\"extra\": 1,\n  \"widgets\"", 1);
        assert!(matches!(from_json(&text), Err(SpecError::Shape(_))));
    }
}
