mod common;

use std::collections::BTreeMap;

use common::*;
use guigen_core::layout::{classify_areas, parse_ui, Geometry, WidgetNode, WidgetTree};
use proptest::prelude::*;
use serde_json::Value;

/// Compare the parser against the frozen output of `oracles/ui_walk.py`.
#[test]
fn intervor_layout_matches_walk_oracle() {
    let tree = parse_ui(&read(intervor_step1().join("layout.ui"))).unwrap();
    let expected: Vec<Value> =
        serde_json::from_str(&read(workspace_root().join("crates/core/tests/data/intervor_layout.walk.json"))).unwrap();

    let mut parents = BTreeMap::new();
    for n in tree.nodes() {
        for c in &n.children {
            parents.insert(c.object_name.clone(), n.object_name.clone());
        }
    }
    let ours: Vec<Value> = tree
        .nodes()
        .map(|n| {
            serde_json::json!({
                "class": n.class_name,
                "name": n.object_name,
                "parent": parents.get(&n.object_name),
                "rect": n.geometry.map(|g| vec![g.x, g.y, g.w, g.h]),
            })
        })
        .collect();
    assert_eq!(ours, expected);

    let areas = classify_areas(&tree).unwrap();
    let names: Vec<_> = areas.names().into_iter().map(|(_, n)| n).collect();
    assert_eq!(names, ["area_input", "area_output", "area_update", "area_viewer"]);
}

const CLASSES: &[&str] = &["QWidget", "QGroupBox", "QLabel", "QLineEdit", "QCheckBox", "QFrame", "CustomThing"];

fn text_value() -> impl Strategy<Value = String> {
    // XML 1.0 characters, including markup-significant ones and non-ASCII.
    proptest::string::string_regex("[ -~\u{e9}\u{3b1}\u{65e5}\t\n]{0,20}").unwrap()
}

fn props() -> impl Strategy<Value = BTreeMap<String, String>> {
    proptest::collection::btree_map(prop_oneof!["text", "title", "toolTip", "placeholderText"].prop_map(String::from), text_value(), 0..3)
}

fn geometry() -> impl Strategy<Value = Geometry> {
    (0u32..2000, 0u32..2000, 1u32..2000, 1u32..2000).prop_map(|(x, y, w, h)| Geometry::new(x, y, w, h))
}

/// Trees with placeholder names; names are assigned uniquely afterwards.
fn node() -> impl Strategy<Value = WidgetNode> {
    let leaf = (proptest::sample::select(CLASSES), geometry(), props()).prop_map(|(c, g, p)| WidgetNode {
        class_name: c.to_owned(),
        object_name: String::new(),
        geometry: Some(g),
        properties: p,
        children: vec![],
    });
    leaf.prop_recursive(4, 40, 5, |inner| {
        (
            proptest::sample::select(CLASSES),
            proptest::option::of(geometry()),
            props(),
            proptest::collection::vec(inner, 1..5),
        )
            .prop_map(|(c, g, p, children)| WidgetNode {
                class_name: c.to_owned(),
                object_name: String::new(),
                geometry: g,
                properties: p,
                children,
            })
    })
}

fn name_all(n: &mut WidgetNode, next: &mut usize) {
    n.object_name = format!("w{next}");
    *next += 1;
    for c in &mut n.children {
        name_all(c, next);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn serialize_then_parse_is_identity(mut root in node(), class in proptest::option::of("[A-Za-z]{1,8}")) {
        name_all(&mut root, &mut 0);
        let tree = WidgetTree { form_class: class, root };
        let xml = tree.to_ui_xml();
        let back = parse_ui(&xml).unwrap();
        prop_assert_eq!(&back, &tree);
        prop_assert_eq!(back.to_ui_xml(), xml);
    }

    #[test]
    fn walk_visits_every_node_once(mut root in node()) {
        name_all(&mut root, &mut 0);
        let mut count = 0;
        let tree = WidgetTree { form_class: None, root };
        for (i, n) in tree.nodes().enumerate() {
            prop_assert_eq!(&n.object_name, &format!("w{i}"));
            count += 1;
        }
        prop_assert_eq!(count, tree.len());
    }
}
