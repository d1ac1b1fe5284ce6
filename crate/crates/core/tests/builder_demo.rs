mod common;

use common::*;
use guigen_core::spec::{AreaId, WidgetKind};

#[test]
fn intervor_widgets_in_order() {
    let spec = intervor_spec();
    let ids: Vec<(&str, WidgetKind, AreaId)> = spec.widgets.iter().map(|w| (w.id.as_str(), w.kind, w.area)).collect();
    use AreaId::*;
    use WidgetKind::*;
    assert_eq!(
        ids,
        [
            ("lbl_pdb", Label, Input),
            ("flag__pdb_file", FilePicker, Input),
            ("flag__verbose", Checkbox, Input),
            ("run", RunButton, Input),
            ("out_text_log", TextOutput, Output),
            ("out_image_patch_areas", ImageOutput, Output),
            ("out_table_interface_stats", TableOutput, Output),
            ("status_bar", StatusBar, Output),
            ("lbl_color_by", Label, Update),
            ("flag__color_by", Combo, Update),
            ("viewer_3d", ViewerFrame, Viewer),
            ("flag__partner_A", LineEntry, Input),
            ("flag__partner_B", LineEntry, Input),
            ("flag__probe_radius", FloatSpin, Input),
            ("flag__with_interfacial_water", Checkbox, Input),
            ("flag__max_shelling_order", IntSpin, Input),
            ("flag__histogram_bins", IntSpin, Update),
            ("flag__smoothing", FloatSpin, Update),
        ]
    );
    let g = |id| spec.widget(id).unwrap().geometry;
    // Synthesized rows start one gap below the lowest pre-drawn input widget.
    let lowest = ["lbl_pdb", "flag__pdb_file", "flag__verbose", "run"].map(|id| g(id).bottom()).into_iter().max().unwrap();
    assert_eq!(g("flag__partner_A").y, lowest + 8);
    assert_eq!(g("flag__partner_B").y, lowest + 8 + 32);
    assert_eq!(g("flag__partner_A").x, 10);
    assert_eq!(spec.widget("flag__partner_A").unwrap().label_width, Some(140));
    assert_eq!(g("flag__histogram_bins").y, g("flag__color_by").bottom() + 8);
    // Output widgets are placed relative to the output area, through the enclosing frame.
    assert_eq!(spec.slot("log").unwrap().media.as_str(), "text");
    let area = spec.areas.get(Output).unwrap();
    assert!(g("out_text_log").x + g("out_text_log").w <= area.geometry.w);
}
