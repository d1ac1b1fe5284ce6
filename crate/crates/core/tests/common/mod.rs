#![allow(dead_code)]

use std::path::{Path, PathBuf};

use guigen_core::builder::build_from_documents;
use guigen_core::presenter::RunConfig;
use guigen_core::spec::{AreaId, GuiSpec, MediaKind, MetaBlock, ViolationCode, WidgetKind};

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

pub fn fixture(name: &str) -> PathBuf {
    workspace_root().join("fixtures").join(name)
}

pub fn intervor_step1() -> PathBuf {
    workspace_root().join("demos/intervor/plugins/step1_design")
}

pub fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

/// The bundled Intervor-style spec.
pub fn intervor_spec() -> GuiSpec {
    let dir = intervor_step1();
    build_from_documents(
        &read(dir.join("layout.ui")),
        &read(dir.join("selected_flags.txt")),
        &read(dir.join("update_area_flags.txt")),
        MetaBlock::new("intervor", "sbl-intervor-ABW-atomic.exe", "post_analysis.py"),
    )
    .unwrap()
}

/// A small spec with one required file, a bool, a float, a `log` text slot
/// and update flags refreshing viewer, outputs and both.
pub fn small_spec() -> GuiSpec {
    let layout = r#"<ui version="4.0"><class>Small</class>
<widget class="QWidget" name="Small">
 <property name="geometry"><rect><x>0</x><y>0</y><width>800</width><height>600</height></rect></property>
 <widget class="QGroupBox" name="area_input">
  <property name="geometry"><rect><x>0</x><y>0</y><width>400</width><height>300</height></rect></property>
 </widget>
 <widget class="QGroupBox" name="area_output">
  <property name="geometry"><rect><x>400</x><y>0</y><width>400</width><height>300</height></rect></property>
  <widget class="QPlainTextEdit" name="out_text_log">
   <property name="geometry"><rect><x>5</x><y>5</y><width>390</width><height>290</height></rect></property>
  </widget>
 </widget>
 <widget class="QGroupBox" name="area_update">
  <property name="geometry"><rect><x>0</x><y>300</y><width>400</width><height>300</height></rect></property>
 </widget>
 <widget class="QFrame" name="area_viewer">
  <property name="geometry"><rect><x>400</x><y>300</y><width>400</width><height>300</height></rect></property>
 </widget>
</widget></ui>"#;
    let flags = "--in|infile||Input*\n--verbose|bool|false|Verbose\n--radius|float|1.5|Radius\n";
    let update = "--color|enum(a,b)|a|Color|viewer\n--bins|int|10|Bins|outputs\n--smooth|float|0.5|Smooth|outputs,viewer\n";
    build_from_documents(layout, flags, update, MetaBlock::new("small", "small.exe", "post.py")).unwrap()
}

pub fn fake_config(exe: &str, post: &str) -> RunConfig {
    RunConfig::with_programs(fixture(exe), fixture(post))
}

pub fn count_lines(path: &Path) -> usize {
    std::fs::read_to_string(path).map(|s| s.lines().count()).unwrap_or(0)
}

pub fn widget<'a>(s: &'a mut GuiSpec, id: &str) -> &'a mut guigen_core::spec::WidgetSpec {
    s.widgets.iter_mut().find(|w| w.id == id).unwrap_or_else(|| panic!("no widget {id}"))
}

pub type Corruption = (ViolationCode, fn(&mut GuiSpec));

/// One corruption per invariant, applied to the clean `small_spec`.
pub const CORRUPTIONS: &[Corruption] = &[
    (ViolationCode::SchemaMismatch, |s| s.meta.schema = "sblspec/0".into()),
    (ViolationCode::EmptyExe, |s| s.meta.exe = "  ".into()),
    (ViolationCode::EmptyPostScript, |s| s.meta.post_script.clear()),
    (ViolationCode::DuplicateAreaContainer, |s| s.areas.update.as_mut().unwrap().container = "area_input".into()),
    (ViolationCode::InvalidGeometry, |s| widget(s, "run").geometry.w = 0),
    (ViolationCode::InvalidGeometry, |s| s.areas.output.geometry.h = 0),
    (ViolationCode::DuplicateWidgetId, |s| widget(s, "viewer_frame").id = "run".into()),
    (ViolationCode::UndeclaredArea, |s| s.areas.viewer = None),
    (ViolationCode::OutputOutsideOutputArea, |s| widget(s, "out_text_log").area = AreaId::Input),
    (ViolationCode::ViewerOutsideViewerArea, |s| widget(s, "viewer_frame").area = AreaId::Output),
    (ViolationCode::RunButtonCount, |s| s.widgets.retain(|w| w.id != "run")),
    (ViolationCode::RunButtonCount, |s| {
        let mut extra = widget(s, "run").clone();
        extra.id = "run2".into();
        s.widgets.push(extra)
    }),
    (ViolationCode::RunButtonOutsideInput, |s| widget(s, "run").area = AreaId::Output),
    (ViolationCode::SlotPresence, |s| widget(s, "out_text_log").slot = None),
    (ViolationCode::SlotPresence, |s| {
        let slot = widget(s, "out_text_log").slot.clone();
        widget(s, "run").slot = slot
    }),
    (ViolationCode::SlotMediaMismatch, |s| widget(s, "out_text_log").slot.as_mut().unwrap().media = MediaKind::Image),
    (ViolationCode::DuplicateSlot, |s| {
        let mut extra = widget(s, "out_text_log").clone();
        extra.id = "out_text_log2".into();
        s.widgets.push(extra)
    }),
    (ViolationCode::DanglingWidgetRef, |s| s.flags[0].widget_id = "ghost".into()),
    (ViolationCode::DanglingWidgetRef, |s| s.update_flags[0].widget_id = "ghost".into()),
    (ViolationCode::BindingAreaMismatch, |s| widget(s, "flag__verbose").area = AreaId::Update),
    (ViolationCode::BindingKindMismatch, |s| widget(s, "flag__verbose").kind = WidgetKind::LineEntry),
    (ViolationCode::DuplicateBinding, |s| s.flags[2].widget_id = s.flags[1].widget_id.clone()),
    (ViolationCode::BadToken, |s| s.flags[1].flag.token = "verbose".into()),
    (ViolationCode::BadToken, |s| s.flags[1].flag.token = "--two words".into()),
    (ViolationCode::DuplicateToken, |s| s.flags[2].flag.token = s.flags[1].flag.token.clone()),
    (ViolationCode::TokenOverlap, |s| s.update_flags[1].flag.token = "--radius".into()),
    (ViolationCode::BadBoolDefault, |s| s.flags[1].flag.default = "yes".into()),
    (ViolationCode::BadNumericDefault, |s| s.flags[2].flag.default = "wide".into()),
    (ViolationCode::BadNumericDefault, |s| s.update_flags[1].flag.default = "1.5".into()),
    (ViolationCode::BadEnumChoices, |s| s.update_flags[0].flag.choices = vec!["a".into()]),
    (ViolationCode::BadEnumChoices, |s| s.flags[1].flag.choices = vec!["a".into(), "b".into()]),
    (ViolationCode::BadEnumDefault, |s| s.update_flags[0].flag.default = "z".into()),
    (ViolationCode::EmptyRefresh, |s| s.update_flags[2].refresh.clear()),
];
