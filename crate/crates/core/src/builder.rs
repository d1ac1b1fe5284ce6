//! Merge a parsed layout, the flag catalogs and metadata into a [`GuiSpec`].
//!
//! Naming conventions in the layout:
//!
//! * `flag__<name>`: pre-drawn widget for the flag whose token, stripped of
//!   leading dashes with `-` turned into `_`, is `<name>`.
//! * `out_<media>_<slot>`: output widget bound to manifest slot `<slot>`,
//!   `<media>` one of `text`, `image`, `table`, `html`, `pdf`.
//! * `run`: the run button.
//! * `status_bar` (or any `QStatusBar`): the status line.
//!
//! Flags without a pre-drawn widget get one synthesized below the lowest
//! widget of their area, one row per flag.

use std::collections::HashMap;

use thiserror::Error;

use crate::flags::{FlagSpec, UpdateFlagSpec};
use crate::layout::{AreaMap, AreaSlot, Geometry, WidgetNode, WidgetTree};
use crate::spec::{
    self, AreaBlock, AreaId, AreaSpec, FlagBinding, GuiSpec, MediaKind, MetaBlock, OutputSlot, UpdateBinding,
    ValidationReport, WidgetKind, WidgetSpec,
};

/// Vertical distance between synthesized rows.
pub const ROW_PITCH: u32 = 32;
/// Width of the caption column of synthesized widgets.
pub const LABEL_COLUMN: u32 = 140;
pub const LEFT_MARGIN: u32 = 10;
pub const TOP_GAP: u32 = 8;
pub const CONTROL_WIDTH: u32 = 200;
pub const ROW_HEIGHT: u32 = 24;
pub const RUN_BUTTON_WIDTH: u32 = 120;

pub const FLAG_PREFIX: &str = "flag__";
pub const OUTPUT_PREFIX: &str = "out_";
pub const RUN_BUTTON_ID: &str = "run";
pub const STATUS_BAR_ID: &str = "status_bar";
pub const VIEWER_FRAME_ID: &str = "viewer_frame";

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("update flags given but the layout has no `area_update` container")]
    UpdateFlagsWithoutUpdateArea,
    #[error("widget `{widget}` ({class_name}) cannot show {flag} flag `{token}`")]
    FlagKindMismatch {
        widget: String,
        class_name: String,
        token: String,
        flag: crate::flags::FlagKind,
    },
    #[error("output widget `{0}` does not match `out_<text|image|table|html|pdf>_<slot>`")]
    UnparseableOutputName(String),
    #[error("widget `{widget}` in the {area} area matches no flag of that area's catalog")]
    OrphanFlagWidget { widget: String, area: AreaId },
    #[error("area container `{0}` has no geometry")]
    AreaWithoutGeometry(String),
    #[error("built spec does not validate: {0}")]
    Invalid(ValidationReport),
}

/// A layout leaf together with the area it sits in and its geometry
/// relative to that area.
struct Placed<'a> {
    node: &'a WidgetNode,
    area: AreaId,
    geometry: Geometry,
}

pub fn build_spec(
    tree: &WidgetTree,
    areas: &AreaMap<'_>,
    flags: &[FlagSpec],
    update_flags: &[UpdateFlagSpec],
    meta: MetaBlock,
) -> Result<GuiSpec, BuildError> {
    if !update_flags.is_empty() && areas.update.is_none() {
        return Err(BuildError::UpdateFlagsWithoutUpdateArea);
    }

    let area_of: HashMap<&str, AreaId> = areas
        .names()
        .into_iter()
        .map(|(slot, name)| (name, AreaId::from(slot)))
        .collect();
    let mut placed = Vec::new();
    let mut area_rects = HashMap::new();
    // The root's own geometry is the window position and does not shift children.
    collect(&tree.root, (0, 0), None, &area_of, &mut placed, &mut area_rects);

    let area_spec = |slot: AreaSlot| -> Result<Option<AreaSpec>, BuildError> {
        let Some(node) = areas.get(slot) else { return Ok(None) };
        let geometry = *area_rects
            .get(node.object_name.as_str())
            .ok_or_else(|| BuildError::AreaWithoutGeometry(node.object_name.clone()))?;
        Ok(Some(AreaSpec {
            container: node.object_name.clone(),
            geometry,
        }))
    };
    let area_block = AreaBlock {
        input: area_spec(AreaSlot::Input)?.expect("input area is always bound"),
        output: area_spec(AreaSlot::Output)?.expect("output area is always bound"),
        update: area_spec(AreaSlot::Update)?,
        viewer: area_spec(AreaSlot::Viewer)?,
    };

    let input_flags: HashMap<String, &FlagSpec> = flags.iter().map(|f| (f.widget_name(), f)).collect();
    let update_by_name: HashMap<String, &FlagSpec> =
        update_flags.iter().map(|u| (u.flag.widget_name(), &u.flag)).collect();

    let mut widgets = Vec::new();
    let mut predrawn: HashMap<(AreaId, String), usize> = HashMap::new();
    let mut bottoms: HashMap<AreaId, u32> = HashMap::new();
    for p in &placed {
        let bottom = bottoms.entry(p.area).or_default();
        *bottom = (*bottom).max(p.geometry.bottom());

        let name = p.node.object_name.as_str();
        let catalog = match p.area {
            AreaId::Input => Some(&input_flags),
            AreaId::Update => Some(&update_by_name),
            _ => None,
        };
        let widget = if name.starts_with(FLAG_PREFIX) {
            let flag = catalog.and_then(|c| c.get(name)).ok_or_else(|| BuildError::OrphanFlagWidget {
                widget: name.to_owned(),
                area: p.area,
            })?;
            predrawn.insert((p.area, name.to_owned()), widgets.len());
            flag_widget(p, flag)?
        } else if let Some(rest) = name.strip_prefix(OUTPUT_PREFIX) {
            output_widget(p, rest)?
        } else if let Some(kind) = plain_kind(p) {
            WidgetSpec {
                id: name.to_owned(),
                kind,
                area: p.area,
                geometry: p.geometry,
                label: p.node.caption().unwrap_or(name).to_owned(),
                label_width: None,
                tooltip: p.node.property("toolTip").map(str::to_owned),
                slot: None,
            }
        } else {
            continue;
        };
        widgets.push(widget);
    }

    let mut rows: HashMap<AreaId, u32> = HashMap::new();
    let mut next_row = |area: AreaId| -> u32 {
        let row = rows.entry(area).or_default();
        let y = bottoms.get(&area).copied().unwrap_or(0) + TOP_GAP + *row * ROW_PITCH;
        *row += 1;
        y
    };

    if !widgets.iter().any(|w| w.kind == WidgetKind::RunButton) {
        widgets.push(WidgetSpec {
            id: RUN_BUTTON_ID.into(),
            kind: WidgetKind::RunButton,
            area: AreaId::Input,
            geometry: Geometry::new(LEFT_MARGIN, next_row(AreaId::Input), RUN_BUTTON_WIDTH, ROW_HEIGHT),
            label: "Run".into(),
            label_width: None,
            tooltip: None,
            slot: None,
        });
    }

    let mut bind = |flag: &FlagSpec, area: AreaId, widgets: &mut Vec<WidgetSpec>| -> String {
        let name = flag.widget_name();
        if !predrawn.contains_key(&(area, name.clone())) {
            widgets.push(WidgetSpec {
                id: name.clone(),
                kind: WidgetKind::for_flag(flag.kind),
                area,
                geometry: Geometry::new(LEFT_MARGIN, next_row(area), LABEL_COLUMN + CONTROL_WIDTH, ROW_HEIGHT),
                label: flag.label.clone(),
                label_width: Some(LABEL_COLUMN),
                tooltip: None,
                slot: None,
            });
        }
        name
    };
    let flag_bindings: Vec<FlagBinding> = flags
        .iter()
        .map(|f| FlagBinding {
            flag: f.clone(),
            widget_id: bind(f, AreaId::Input, &mut widgets),
        })
        .collect();
    let update_bindings: Vec<UpdateBinding> = update_flags
        .iter()
        .map(|u| UpdateBinding {
            flag: u.flag.clone(),
            refresh: u.refresh.clone(),
            widget_id: bind(&u.flag, AreaId::Update, &mut widgets),
        })
        .collect();

    if let Some(viewer) = &area_block.viewer {
        if !widgets.iter().any(|w| w.area == AreaId::Viewer) {
            widgets.push(WidgetSpec {
                id: VIEWER_FRAME_ID.into(),
                kind: WidgetKind::ViewerFrame,
                area: AreaId::Viewer,
                geometry: Geometry::new(0, 0, viewer.geometry.w, viewer.geometry.h),
                label: "3D view".into(),
                label_width: None,
                tooltip: None,
                slot: None,
            });
        }
    }

    let spec = GuiSpec {
        meta,
        areas: area_block,
        widgets,
        flags: flag_bindings,
        update_flags: update_bindings,
    };
    let report = spec::validate(&spec);
    if report.is_clean() {
        Ok(spec)
    } else {
        Err(BuildError::Invalid(report))
    }
}

/// Walk the tree, recording every leaf inside an area with geometry relative
/// to the innermost enclosing area, and each area's rectangle relative to
/// the layout root. `abs` is the node's origin relative to the root.
fn collect<'a>(
    node: &'a WidgetNode,
    abs: (u32, u32),
    current: Option<(AreaId, (u32, u32))>,
    area_of: &HashMap<&str, AreaId>,
    placed: &mut Vec<Placed<'a>>,
    area_rects: &mut HashMap<&'a str, Geometry>,
) {
    let own_area = area_of.get(node.object_name.as_str()).copied();
    let current = match own_area {
        Some(area) => {
            if let Some(g) = node.geometry {
                area_rects.insert(node.object_name.as_str(), Geometry::new(abs.0, abs.1, g.w, g.h));
            }
            Some((area, abs))
        }
        None => current,
    };

    if node.is_leaf() {
        // An area container with no children is not itself a widget.
        if let (None, Some((area, origin)), Some(g)) = (own_area, current, node.geometry) {
            placed.push(Placed {
                node,
                area,
                geometry: Geometry::new(abs.0 - origin.0, abs.1 - origin.1, g.w, g.h),
            });
        }
        return;
    }
    for child in &node.children {
        let child_abs = match child.geometry {
            Some(g) => (abs.0 + g.x, abs.1 + g.y),
            None => abs,
        };
        collect(child, child_abs, current, area_of, placed, area_rects);
    }
}

fn flag_widget(p: &Placed<'_>, flag: &FlagSpec) -> Result<WidgetSpec, BuildError> {
    let kind = WidgetKind::for_flag(flag.kind);
    if !class_accepts(&p.node.class_name, kind) {
        return Err(BuildError::FlagKindMismatch {
            widget: p.node.object_name.clone(),
            class_name: p.node.class_name.clone(),
            token: flag.token.clone(),
            flag: flag.kind,
        });
    }
    Ok(WidgetSpec {
        id: p.node.object_name.clone(),
        kind,
        area: p.area,
        geometry: p.geometry,
        label: flag.label.clone(),
        label_width: None,
        tooltip: p.node.property("toolTip").map(str::to_owned),
        slot: None,
    })
}

/// Designer classes able to stand in for a flag widget kind.
fn class_accepts(class_name: &str, kind: WidgetKind) -> bool {
    match kind {
        WidgetKind::Checkbox => matches!(class_name, "QCheckBox" | "QRadioButton"),
        WidgetKind::LineEntry => matches!(class_name, "QLineEdit"),
        WidgetKind::FilePicker => matches!(class_name, "QLineEdit" | "QgsFileWidget" | "KUrlRequester"),
        WidgetKind::IntSpin => matches!(class_name, "QSpinBox" | "QSlider"),
        WidgetKind::FloatSpin => matches!(class_name, "QDoubleSpinBox"),
        WidgetKind::Combo => matches!(class_name, "QComboBox"),
        _ => false,
    }
}

fn output_widget(p: &Placed<'_>, rest: &str) -> Result<WidgetSpec, BuildError> {
    let name = &p.node.object_name;
    let unparseable = || BuildError::UnparseableOutputName(name.clone());
    let (media, slot) = rest.split_once('_').ok_or_else(unparseable)?;
    let media = MediaKind::parse(media).ok_or_else(unparseable)?;
    if slot.is_empty() || !slot.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(unparseable());
    }
    Ok(WidgetSpec {
        id: name.clone(),
        kind: media.widget_kind(),
        area: p.area,
        geometry: p.geometry,
        label: p.node.caption().unwrap_or(slot).to_owned(),
        label_width: None,
        tooltip: p.node.property("toolTip").map(str::to_owned),
        slot: Some(OutputSlot {
            slot_name: slot.to_owned(),
            media,
        }),
    })
}

/// Kinds for layout leaves that are neither flag nor output widgets.
fn plain_kind(p: &Placed<'_>) -> Option<WidgetKind> {
    let name = p.node.object_name.as_str();
    let class = p.node.class_name.as_str();
    if name == RUN_BUTTON_ID {
        Some(WidgetKind::RunButton)
    } else if name == STATUS_BAR_ID || class == "QStatusBar" {
        Some(WidgetKind::StatusBar)
    } else if p.area == AreaId::Viewer {
        Some(WidgetKind::ViewerFrame)
    } else if class == "QLabel" {
        Some(WidgetKind::Label)
    } else {
        None
    }
}

/// Any failure turning step-one source documents into a spec.
#[derive(Debug, Error)]
pub enum SourceError {
    #[error("layout: {0}")]
    Layout(#[from] crate::layout::LayoutError),
    #[error("{file}: {source}")]
    Flags {
        file: &'static str,
        source: crate::flags::FlagError,
    },
    #[error(transparent)]
    Build(#[from] BuildError),
}

/// Parse a layout document and the two flag catalogs, then build the spec.
/// `update_flags` may be empty when the layout has no update area.
pub fn build_from_documents(
    layout: &str,
    flags: &str,
    update_flags: &str,
    meta: MetaBlock,
) -> Result<GuiSpec, SourceError> {
    let tree = crate::layout::parse_ui(layout)?;
    let areas = crate::layout::classify_areas(&tree)?;
    let flags = crate::flags::parse_input_flags(flags).map_err(|source| SourceError::Flags {
        file: "selected_flags.txt",
        source,
    })?;
    let update = crate::flags::parse_update_flags(update_flags).map_err(|source| SourceError::Flags {
        file: "update_area_flags.txt",
        source,
    })?;
    Ok(build_spec(&tree, &areas, &flags, &update, meta)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flags::{parse_input_flags, parse_update_flags, FlagKind};
    use crate::layout::{classify_areas, parse_ui};

    fn layout(input_kids: &str, output_kids: &str, extra: &str) -> WidgetTree {
        let doc = format!(
            r#"<ui version="4.0"><widget class="QWidget" name="root">
              <widget class="QGroupBox" name="area_input"><property name="geometry"><rect><x>0</x><y>0</y><width>400</width><height>300</height></rect></property>{input_kids}</widget>
              <widget class="QGroupBox" name="area_output"><property name="geometry"><rect><x>400</x><y>0</y><width>400</width><height>300</height></rect></property>{output_kids}</widget>
              {extra}
            </widget></ui>"#
        );
        parse_ui(&doc).unwrap()
    }

    fn leaf(class: &str, name: &str, y: u32) -> String {
        format!(
            r#"<widget class="{class}" name="{name}"><property name="geometry"><rect><x>10</x><y>{y}</y><width>100</width><height>24</height></rect></property></widget>"#
        )
    }

    fn build(tree: &WidgetTree, flags: &[FlagSpec], update: &[UpdateFlagSpec]) -> Result<GuiSpec, BuildError> {
        let areas = classify_areas(tree).unwrap();
        build_spec(tree, &areas, flags, update, MetaBlock::new("t", "t.exe", "post.py"))
    }

    #[test]
    fn empty_catalog_gets_run_button_and_slot() {
        let tree = layout("", &leaf("QPlainTextEdit", "out_text_log", 10), "");
        let spec = build(&tree, &[], &[]).unwrap();
        assert_eq!(spec.widget_ids(), ["out_text_log", "run"]);
        assert_eq!(spec.widget("run").unwrap().area, AreaId::Input);
        assert_eq!(spec.slot("log").unwrap().media, MediaKind::Text);
    }

    #[test]
    fn synthesized_flags_are_stacked() {
        let tree = layout(&leaf("QPushButton", "run", 10), "", "");
        let flags = parse_input_flags("--verbose\n--radius|float|3.0|Radius\n").unwrap();
        let spec = build(&tree, &flags, &[]).unwrap();
        let v = spec.widget("flag__verbose").unwrap();
        let r = spec.widget("flag__radius").unwrap();
        assert_eq!(v.kind, WidgetKind::Checkbox);
        assert_eq!(r.kind, WidgetKind::FloatSpin);
        assert_eq!(v.geometry, Geometry::new(10, 34 + TOP_GAP, 340, 24));
        assert_eq!(r.geometry.y - v.geometry.y, ROW_PITCH);
        assert_eq!(v.label_width, Some(LABEL_COLUMN));
        assert_eq!(spec.flags[0].widget_id, "flag__verbose");
        assert_eq!(spec.flags[1].widget_id, "flag__radius");
    }

    #[test]
    fn predrawn_flag_widget_is_bound() {
        let tree = layout(&leaf("QDoubleSpinBox", "flag__radius", 10), "", "");
        let flags = parse_input_flags("--radius|float|3.0|Radius\n").unwrap();
        let spec = build(&tree, &flags, &[]).unwrap();
        let w = spec.widget("flag__radius").unwrap();
        assert_eq!(w.geometry, Geometry::new(10, 10, 100, 24));
        assert_eq!(w.label_width, None);
    }

    #[test]
    fn predrawn_kind_mismatch() {
        let tree = layout(&leaf("QCheckBox", "flag__radius", 10), "", "");
        let flags = parse_input_flags("--radius|float|3.0|Radius\n").unwrap();
        assert!(matches!(build(&tree, &flags, &[]), Err(BuildError::FlagKindMismatch { .. })));
    }

    #[test]
    fn orphan_flag_widget() {
        let tree = layout(&leaf("QCheckBox", "flag__ghost", 10), "", "");
        assert!(matches!(build(&tree, &[], &[]), Err(BuildError::OrphanFlagWidget { .. })));
    }

    #[test]
    fn bad_output_names() {
        for name in ["out_log", "out_movie_x", "out_text_", "out_text_a-b"] {
            let tree = layout("", &leaf("QLabel", name, 10), "");
            assert!(matches!(build(&tree, &[], &[]), Err(BuildError::UnparseableOutputName(_))), "{name}");
        }
    }

    #[test]
    fn update_flags_need_update_area() {
        let tree = layout("", "", "");
        let update = parse_update_flags("--s|float|0.5|S|viewer\n").unwrap();
        assert!(matches!(build(&tree, &[], &update), Err(BuildError::UpdateFlagsWithoutUpdateArea)));
    }

    #[test]
    fn update_and_viewer_areas() {
        let extra = r#"<widget class="QGroupBox" name="area_update"><property name="geometry"><rect><x>0</x><y>300</y><width>400</width><height>100</height></rect></property></widget>
                       <widget class="QFrame" name="area_viewer"><property name="geometry"><rect><x>400</x><y>300</y><width>400</width><height>100</height></rect></property></widget>"#;
        let tree = layout("", "", extra);
        let update = parse_update_flags("--s|float|0.5|S|viewer\n").unwrap();
        let spec = build(&tree, &[], &update).unwrap();
        let s = spec.widget("flag__s").unwrap();
        assert_eq!(s.area, AreaId::Update);
        assert_eq!(s.geometry.y, TOP_GAP);
        let v = spec.widget(VIEWER_FRAME_ID).unwrap();
        assert_eq!(v.geometry, Geometry::new(0, 0, 400, 100));
        assert_eq!(spec.areas.viewer.as_ref().unwrap().geometry, Geometry::new(400, 300, 400, 100));
    }

    #[test]
    fn overlapping_catalogs_fail_validation() {
        let extra = r#"<widget class="QGroupBox" name="area_update"><property name="geometry"><rect><x>0</x><y>300</y><width>400</width><height>100</height></rect></property></widget>"#;
        let tree = layout("", "", extra);
        let flags = vec![FlagSpec::new("--s", FlagKind::Float, "", "S")];
        let update = parse_update_flags("--s|float|0.5|S|viewer\n").unwrap();
        match build(&tree, &flags, &update) {
            Err(BuildError::Invalid(r)) => assert!(r.codes().contains(&spec::ViolationCode::TokenOverlap)),
            other => panic!("{other:?}"),
        }
    }
}
