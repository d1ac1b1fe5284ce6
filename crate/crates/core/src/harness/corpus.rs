//! Seeded generators of valid specs and widget states for differential and
//! round-trip testing.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::flags::{FlagKind, FlagSpec, RefreshTarget};
use crate::layout::Geometry;
use crate::presenter::WidgetValue;
use crate::spec::{
    AreaBlock, AreaId, AreaSpec, FlagBinding, GuiSpec, MediaKind, MetaBlock, OutputSlot, UpdateBinding, WidgetKind,
    WidgetSpec,
};

const WORDS: &[&str] = &[
    "radius", "probe", "chain", "mode", "verbose", "depth", "alpha", "seed", "out", "level", "water", "shell", "grid",
];
const TEXT_PIECES: &[&str] = &[
    "a", "B", "3.0", "x y", "  padded  ", "\t", "ünïcödé", "-dash", "--looks-like-flag", "quote\"d", "semi;colon",
    "$(echo)", "1e3", "path/to/file.pdb", "",
];
const LABEL_PIECES: &[&str] = &["Radius", "Chains of A", "Ångström", "x<y>&z", "PDB file", "Mode", "tab\tlabel", "日本"];

pub fn random_geometry(rng: &mut impl Rng) -> Geometry {
    Geometry::new(
        rng.random_range(0..800),
        rng.random_range(0..800),
        rng.random_range(1..400),
        rng.random_range(1..200),
    )
}

fn text(rng: &mut impl Rng, pieces: &[&str], max: usize) -> String {
    let n = rng.random_range(0..=max);
    (0..n).map(|_| *pieces.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

fn label(rng: &mut impl Rng) -> String {
    let mut l = text(rng, LABEL_PIECES, 3);
    if l.is_empty() {
        l.push_str("Flag");
    }
    l
}

fn random_flag(rng: &mut impl Rng, token: String) -> FlagSpec {
    let kind = *[
        FlagKind::Bool,
        FlagKind::Int,
        FlagKind::Float,
        FlagKind::String,
        FlagKind::Infile,
        FlagKind::Enum,
    ]
    .choose(rng)
    .unwrap();
    let mut flag = FlagSpec::new(token, kind, "", label(rng));
    match kind {
        FlagKind::Bool => flag.default = ["", "true", "false"].choose(rng).unwrap().to_string(),
        FlagKind::Int if rng.random_bool(0.7) => flag.default = rng.random_range(-50i64..500).to_string(),
        FlagKind::Float if rng.random_bool(0.7) => flag.default = format!("{}", rng.random_range(-10.0..10.0f64)),
        FlagKind::String if rng.random_bool(0.5) => flag.default = text(rng, TEXT_PIECES, 2).trim().to_owned(),
        FlagKind::Infile => {
            if rng.random_bool(0.4) {
                flag.label.push('*');
            } else if rng.random_bool(0.3) {
                flag.default = "input.dat".into();
            }
        }
        FlagKind::Enum => {
            let n = rng.random_range(2..5);
            flag.choices = (0..n).map(|i| format!("{}{i}", WORDS.choose(rng).unwrap())).collect();
            if rng.random_bool(0.8) {
                flag.default = flag.choices.choose(rng).unwrap().clone();
            }
        }
        _ => {}
    }
    flag
}

fn widget(id: String, kind: WidgetKind, area: AreaId, rng: &mut impl Rng) -> WidgetSpec {
    WidgetSpec {
        id,
        kind,
        area,
        geometry: random_geometry(rng),
        label: text(rng, LABEL_PIECES, 2),
        label_width: rng.random_bool(0.3).then(|| rng.random_range(1..200)),
        tooltip: rng.random_bool(0.2).then(|| text(rng, LABEL_PIECES, 4)),
        slot: None,
    }
}

/// A random spec that validates cleanly, with up to `max_flags` input flags.
pub fn random_spec(rng: &mut impl Rng, max_flags: usize) -> GuiSpec {
    let app = format!("{}_{}", WORDS.choose(rng).unwrap(), rng.random_range(0..1000));
    let area = |name: &str, rng: &mut _| AreaSpec {
        container: name.to_owned(),
        geometry: random_geometry(rng),
    };
    let areas = AreaBlock {
        input: area("area_input", rng),
        output: area("area_output", rng),
        update: rng.random_bool(0.6).then(|| area("area_update", rng)),
        viewer: rng.random_bool(0.6).then(|| area("area_viewer", rng)),
    };

    let mut widgets = Vec::new();
    let mut flags = Vec::new();
    let n_flags = rng.random_range(0..=max_flags);
    for i in 0..n_flags {
        let token = format!("--{}-{i}", WORDS.choose(rng).unwrap());
        let flag = random_flag(rng, token);
        let id = flag.widget_name();
        widgets.push(widget(id.clone(), WidgetKind::for_flag(flag.kind), AreaId::Input, rng));
        flags.push(FlagBinding { flag, widget_id: id });
    }
    widgets.push(widget("run".into(), WidgetKind::RunButton, AreaId::Input, rng));
    if rng.random_bool(0.5) {
        widgets.push(widget("lbl_title".into(), WidgetKind::Label, AreaId::Input, rng));
    }

    for i in 0..rng.random_range(0..4) {
        let media = *MediaKind::ALL.choose(rng).unwrap();
        let slot_name = format!("slot{i}");
        let mut w = widget(
            format!("out_{}_{slot_name}", media.as_str()),
            media.widget_kind(),
            AreaId::Output,
            rng,
        );
        w.slot = Some(OutputSlot { slot_name, media });
        widgets.push(w);
    }
    if rng.random_bool(0.7) {
        widgets.push(widget("status_bar".into(), WidgetKind::StatusBar, AreaId::Output, rng));
    }

    let mut update_flags = Vec::new();
    if areas.update.is_some() {
        for i in 0..rng.random_range(0..4) {
            let flag = random_flag(rng, format!("--update-{i}"));
            let id = flag.widget_name();
            widgets.push(widget(id.clone(), WidgetKind::for_flag(flag.kind), AreaId::Update, rng));
            let mut refresh = BTreeSet::new();
            match rng.random_range(0..3) {
                0 => refresh.insert(RefreshTarget::Outputs),
                1 => refresh.insert(RefreshTarget::Viewer),
                _ => {
                    refresh.insert(RefreshTarget::Viewer);
                    refresh.insert(RefreshTarget::Outputs)
                }
            };
            update_flags.push(UpdateBinding {
                flag,
                refresh,
                widget_id: id,
            });
        }
    }
    if areas.viewer.is_some() {
        widgets.push(widget("viewer_frame".into(), WidgetKind::ViewerFrame, AreaId::Viewer, rng));
    }

    GuiSpec {
        meta: MetaBlock::new(app, format!("tool-{}.exe", rng.random_range(0..100)), "post_analysis.py"),
        areas,
        widgets,
        flags,
        update_flags,
    }
}

/// A spec whose only flags are `k` booleans, in order `--b0 .. --b{k-1}`.
pub fn bool_spec(k: usize) -> GuiSpec {
    let geometry = Geometry::new(0, 0, 10, 10);
    let mut widgets = vec![WidgetSpec {
        id: "run".into(),
        kind: WidgetKind::RunButton,
        area: AreaId::Input,
        geometry,
        label: "Run".into(),
        label_width: None,
        tooltip: None,
        slot: None,
    }];
    let mut flags = Vec::new();
    for i in 0..k {
        let flag = FlagSpec::new(format!("--b{i}"), FlagKind::Bool, "false", format!("b{i}"));
        let id = flag.widget_name();
        widgets.push(WidgetSpec {
            id: id.clone(),
            kind: WidgetKind::Checkbox,
            label: flag.label.clone(),
            ..widgets[0].clone()
        });
        flags.push(FlagBinding { flag, widget_id: id });
    }
    let area = |c: &str| AreaSpec {
        container: c.into(),
        geometry: Geometry::new(0, 0, 100, 100),
    };
    GuiSpec {
        meta: MetaBlock::new("bools", "bools.exe", "post.py"),
        areas: AreaBlock {
            input: area("area_input"),
            output: area("area_output"),
            update: None,
            viewer: None,
        },
        widgets,
        flags,
        update_flags: Vec::new(),
    }
}

fn pad(rng: &mut impl Rng, s: String) -> String {
    match rng.random_range(0..4) {
        0 => format!("  {s}"),
        1 => format!("{s}\t"),
        _ => s,
    }
}

fn random_text_value(rng: &mut impl Rng, flag: &FlagSpec) -> String {
    let core = match flag.kind {
        FlagKind::Int => match rng.random_range(0..5) {
            0 => return String::new(),
            1 => return "   ".into(),
            _ => rng.random_range(-1000i64..1000).to_string(),
        },
        FlagKind::Float => match rng.random_range(0..5) {
            0 => return String::new(),
            1 => "1e-3".into(),
            _ => format!("{:.3}", rng.random_range(-100.0..100.0f64)),
        },
        FlagKind::Enum => match rng.random_range(0..4) {
            0 => return String::new(),
            _ => flag.choices.choose(rng).unwrap().clone(),
        },
        _ => return text(rng, TEXT_PIECES, 3),
    };
    pad(rng, core)
}

/// A random state for the input flags of `spec`, as an ordered list of
/// entries. Keys may be missing; with probability `noise` an entry carries
/// a value of the wrong type or names an unknown widget.
pub fn random_state(rng: &mut impl Rng, spec: &GuiSpec, noise: f64) -> Vec<(String, WidgetValue)> {
    let mut entries = Vec::new();
    for b in &spec.flags {
        if rng.random_bool(0.2) {
            continue;
        }
        let value = if rng.random_bool(noise) {
            match b.flag.kind {
                FlagKind::Bool => WidgetValue::Text("true".into()),
                FlagKind::Int | FlagKind::Float if rng.random_bool(0.5) => WidgetValue::Text("abc".into()),
                _ => WidgetValue::Bool(rng.random_bool(0.5)),
            }
        } else {
            match b.flag.kind {
                FlagKind::Bool => WidgetValue::Bool(rng.random_bool(0.5)),
                _ => WidgetValue::Text(random_text_value(rng, &b.flag)),
            }
        };
        entries.push((b.widget_id.clone(), value));
    }
    if rng.random_bool(noise / 4.0) {
        entries.push(("not_a_widget".into(), WidgetValue::Bool(true)));
    }
    for i in (1..entries.len()).rev() {
        entries.swap(i, rng.random_range(0..=i));
    }
    entries
}
