//! Designer layout files (`.ui`, Qt Designer XML dialect).
//!
//! A layout is parsed into a [`WidgetTree`] that mirrors the XML widget
//! hierarchy. Containers whose object name starts with `area_input`,
//! `area_output`, `area_update` or `area_viewer` are the plugin areas; see
//! [`classify_areas`].
//!
//! Only absolute geometry is supported. Documents using layout managers are
//! rejected with [`LayoutError::UnsupportedLayout`].

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Properties interpreted downstream. Everything else passes through.
pub const TEXT_PROPERTIES: [&str; 3] = ["text", "title", "toolTip"];

/// Absolute pixel rectangle, relative to the parent widget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Geometry {
    pub const fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Self { x, y, w, h }
    }

    pub fn is_valid(&self) -> bool {
        self.w >= 1 && self.h >= 1
    }

    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    /// Shift by a parent origin.
    pub fn offset(&self, dx: u32, dy: u32) -> Self {
        Self::new(self.x + dx, self.y + dy, self.w, self.h)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WidgetNode {
    pub class_name: String,
    pub object_name: String,
    /// Required for leaves; optional on containers (treated as origin 0,0).
    pub geometry: Option<Geometry>,
    pub properties: BTreeMap<String, String>,
    pub children: Vec<WidgetNode>,
}

impl WidgetNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn property(&self, name: &str) -> Option<&str> {
        self.properties.get(name).map(String::as_str)
    }

    /// `text`, then `title`, then nothing.
    pub fn caption(&self) -> Option<&str> {
        self.property("text").or_else(|| self.property("title"))
    }

    /// Pre-order traversal, including `self`.
    pub fn walk(&self) -> Walk<'_> {
        Walk { stack: vec![self] }
    }
}

pub struct Walk<'a> {
    stack: Vec<&'a WidgetNode>,
}

impl<'a> Iterator for Walk<'a> {
    type Item = &'a WidgetNode;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}

/// A parsed `.ui` document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WidgetTree {
    /// Content of the top-level `<class>` element, if any.
    pub form_class: Option<String>,
    pub root: WidgetNode,
}

impl WidgetTree {
    pub fn nodes(&self) -> Walk<'_> {
        self.root.walk()
    }

    pub fn len(&self) -> usize {
        self.nodes().count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn find(&self, object_name: &str) -> Option<&WidgetNode> {
        self.nodes().find(|n| n.object_name == object_name)
    }

    /// Serialize back to the designer XML dialect. Every property is
    /// written as a `<string>` except `geometry`, which is a `<rect>`.
    pub fn to_ui_xml(&self) -> String {
        let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<ui version=\"4.0\">\n");
        if let Some(class) = &self.form_class {
            let _ = writeln!(out, " <class>{}</class>", escape_xml(class));
        }
        write_node(&mut out, &self.root, 1);
        out.push_str("</ui>\n");
        out
    }
}

fn write_node(out: &mut String, node: &WidgetNode, depth: usize) {
    let pad = " ".repeat(depth);
    let _ = writeln!(
        out,
        "{pad}<widget class=\"{}\" name=\"{}\">",
        escape_xml(&node.class_name),
        escape_xml(&node.object_name)
    );
    if let Some(g) = node.geometry {
        let _ = writeln!(
            out,
            "{pad} <property name=\"geometry\"><rect><x>{}</x><y>{}</y><width>{}</width><height>{}</height></rect></property>",
            g.x, g.y, g.w, g.h
        );
    }
    for (name, value) in &node.properties {
        let _ = writeln!(
            out,
            "{pad} <property name=\"{}\"><string>{}</string></property>",
            escape_xml(name),
            escape_xml(value)
        );
    }
    for child in &node.children {
        write_node(out, child, depth + 1);
    }
    let _ = writeln!(out, "{pad}</widget>");
}

fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            '\n' => out.push_str("&#10;"),
            c => out.push(c),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AreaSlot {
    Input,
    Output,
    Update,
    Viewer,
}

impl AreaSlot {
    pub const ALL: [AreaSlot; 4] = [Self::Input, Self::Output, Self::Update, Self::Viewer];

    pub fn prefix(self) -> &'static str {
        match self {
            Self::Input => "area_input",
            Self::Output => "area_output",
            Self::Update => "area_update",
            Self::Viewer => "area_viewer",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Input => "input",
            Self::Output => "output",
            Self::Update => "update",
            Self::Viewer => "viewer",
        }
    }

    pub fn from_object_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| name.starts_with(s.prefix()))
    }
}

impl fmt::Display for AreaSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Area containers of a tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AreaMap<'a> {
    pub input: &'a WidgetNode,
    pub output: &'a WidgetNode,
    pub update: Option<&'a WidgetNode>,
    pub viewer: Option<&'a WidgetNode>,
}

impl<'a> AreaMap<'a> {
    pub fn get(&self, slot: AreaSlot) -> Option<&'a WidgetNode> {
        match slot {
            AreaSlot::Input => Some(self.input),
            AreaSlot::Output => Some(self.output),
            AreaSlot::Update => self.update,
            AreaSlot::Viewer => self.viewer,
        }
    }

    /// `(slot, container object name)` for each bound slot.
    pub fn names(&self) -> Vec<(AreaSlot, &'a str)> {
        AreaSlot::ALL
            .into_iter()
            .filter_map(|s| self.get(s).map(|n| (s, n.object_name.as_str())))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("line {line}: expected a <ui> document with exactly one root <widget>, found {found}")]
    RootWidget { line: u32, found: usize },
    #[error("line {line}: <widget> element without a name attribute")]
    MissingObjectName { line: u32 },
    #[error("line {line}: duplicate object name `{name}` (first seen on line {first_line})")]
    DuplicateObjectName {
        name: String,
        line: u32,
        first_line: u32,
    },
    #[error("line {line}: widget `{name}` has invalid geometry: {reason}")]
    InvalidGeometry {
        name: String,
        line: u32,
        reason: String,
    },
    #[error("line {line}: widget `{name}` uses a layout manager; only absolute geometry is supported")]
    UnsupportedLayout { name: String, line: u32 },
    #[error("no `{}` container in layout", .0.prefix())]
    MissingArea(AreaSlot),
    #[error("ambiguous {slot} area: both `{first}` and `{second}` match `{}`", .slot.prefix())]
    AmbiguousArea {
        slot: AreaSlot,
        first: String,
        second: String,
    },
}

/// Parse a designer `.ui` document.
pub fn parse_ui(document: &str) -> Result<WidgetTree, LayoutError> {
    let doc = roxmltree::Document::parse(document)
        .map_err(|e| LayoutError::MalformedXml(e.to_string()))?;
    let ui = doc.root_element();
    let line_of = |n: roxmltree::Node| doc.text_pos_at(n.range().start).row;

    let widgets: Vec<_> = ui.children().filter(|n| n.has_tag_name("widget")).collect();
    if ui.tag_name().name() != "ui" || widgets.len() != 1 {
        return Err(LayoutError::RootWidget {
            line: line_of(ui),
            found: widgets.len(),
        });
    }
    let form_class = ui
        .children()
        .find(|n| n.has_tag_name("class"))
        .and_then(|n| n.text())
        .map(|t| t.trim().to_owned());

    let mut seen = HashMap::new();
    let root = parse_widget(widgets[0], true, &mut seen, &line_of)?;
    Ok(WidgetTree { form_class, root })
}

fn parse_widget<'a, F>(
    node: roxmltree::Node<'a, 'a>,
    is_root: bool,
    seen: &mut HashMap<String, u32>,
    line_of: &F,
) -> Result<WidgetNode, LayoutError>
where
    F: Fn(roxmltree::Node) -> u32,
{
    let line = line_of(node);
    let object_name = match node.attribute("name") {
        Some(n) if !n.is_empty() => n.to_owned(),
        _ => return Err(LayoutError::MissingObjectName { line }),
    };
    if let Some(&first_line) = seen.get(&object_name) {
        return Err(LayoutError::DuplicateObjectName {
            name: object_name,
            line,
            first_line,
        });
    }
    seen.insert(object_name.clone(), line);
    let class_name = node.attribute("class").unwrap_or_default().to_owned();

    let mut geometry = None;
    let mut properties = BTreeMap::new();
    let mut children = Vec::new();
    for child in node.children().filter(|c| c.is_element()) {
        match child.tag_name().name() {
            "property" => {
                let name = child.attribute("name").unwrap_or_default();
                let Some(value) = child.children().find(|c| c.is_element()) else {
                    continue;
                };
                if name == "geometry" {
                    geometry = Some(parse_rect(value, &object_name, line_of(child))?);
                } else {
                    properties.insert(name.to_owned(), property_text(value));
                }
            }
            "widget" => children.push(parse_widget(child, false, seen, line_of)?),
            "layout" => {
                return Err(LayoutError::UnsupportedLayout {
                    name: object_name,
                    line: line_of(child),
                })
            }
            // attribute, item, addaction, zorder: not interpreted
            _ => {}
        }
    }

    if geometry.is_none() && children.is_empty() && !is_root {
        return Err(LayoutError::InvalidGeometry {
            name: object_name,
            line,
            reason: "missing geometry property".into(),
        });
    }
    Ok(WidgetNode {
        class_name,
        object_name,
        geometry,
        properties,
        children,
    })
}

fn parse_rect(value: roxmltree::Node, name: &str, line: u32) -> Result<Geometry, LayoutError> {
    let err = |reason: String| LayoutError::InvalidGeometry {
        name: name.to_owned(),
        line,
        reason,
    };
    if !value.has_tag_name("rect") {
        return Err(err(format!("expected <rect>, found <{}>", value.tag_name().name())));
    }
    let field = |tag: &str| -> Result<i64, LayoutError> {
        let text = value
            .children()
            .find(|c| c.has_tag_name(tag))
            .and_then(|c| c.text())
            .ok_or_else(|| err(format!("missing <{tag}>")))?;
        text.trim()
            .parse::<i64>()
            .map_err(|_| err(format!("<{tag}> is not an integer: {text:?}")))
    };
    let (x, y, w, h) = (field("x")?, field("y")?, field("width")?, field("height")?);
    if x < 0 || y < 0 {
        return Err(err(format!("negative origin ({x}, {y})")));
    }
    if w < 1 || h < 1 {
        return Err(err(format!("non-positive size {w}x{h}")));
    }
    let to_u32 = |v: i64| u32::try_from(v).map_err(|_| err(format!("{v} out of range")));
    Ok(Geometry::new(to_u32(x)?, to_u32(y)?, to_u32(w)?, to_u32(h)?))
}

/// Flatten a property value element to text. Scalar values (`string`,
/// `number`, `bool`, `enum`, ...) give their text; compound values (`size`,
/// `font`, ...) give their child texts joined by commas.
fn property_text(value: roxmltree::Node) -> String {
    let parts: Vec<_> = value.children().filter(|c| c.is_element()).collect();
    if parts.is_empty() {
        value.text().unwrap_or_default().to_owned()
    } else {
        parts
            .iter()
            .map(|p| p.text().unwrap_or_default().trim())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Bind area containers by object-name prefix.
pub fn classify_areas(tree: &WidgetTree) -> Result<AreaMap<'_>, LayoutError> {
    let mut found: [Option<&WidgetNode>; 4] = [None; 4];
    for node in tree.nodes() {
        let Some(slot) = AreaSlot::from_object_name(&node.object_name) else {
            continue;
        };
        let entry = &mut found[slot as usize];
        if let Some(first) = entry {
            return Err(LayoutError::AmbiguousArea {
                slot,
                first: first.object_name.clone(),
                second: node.object_name.clone(),
            });
        }
        *entry = Some(node);
    }
    let [input, output, update, viewer] = found;
    Ok(AreaMap {
        input: input.ok_or(LayoutError::MissingArea(AreaSlot::Input))?,
        output: output.ok_or(LayoutError::MissingArea(AreaSlot::Output))?,
        update,
        viewer,
    })
}
