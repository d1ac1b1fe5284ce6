# View of the "alpha_complex" web plugin (Panel, mesh viewer).
# spec-digest: sha256:de9d2b753d925d60864135597219e5303fae9654a060c68c02318d3263484ee0
# Generated by gui-generator 0.1.0. Edit the spec and regenerate instead.
#
# Serve with `panel serve view.py` next to a running plugin-host, whose URL
# is read from $SBL_PLUGIN_HOST (default http://127.0.0.1:8080).

import os
import sys

import panel as pn

HERE = os.path.dirname(os.path.abspath(__file__))
SPEC_FILE = os.path.join(HERE, "alpha_complex.spec.json")
if HERE not in sys.path:
    sys.path.insert(0, HERE)

from presenter import Presenter, load_host_config, load_spec  # noqa: E402


def _placed(x, y, w, h):
    return dict(width=w, height=h, margin=0, styles={"position": "absolute", "left": "%dpx" % x, "top": "%dpx" % y})


class View:
    def __init__(self, host_url=None):
        self._areas = {}
        self._widgets = {}
        self._kinds = {}
        self._status = None
        self._doc = pn.state.curdoc
        self._area("input", "area_input", (10, 10, 380, 300))
        self._area("output", "area_output", (400, 10, 590, 300))
        self._area("update", "area_update", (10, 320, 380, 310))
        self._area("viewer", "area_viewer", (400, 320, 590, 310))
        self._add("lbl_model", "label", "input", (10, 30, 130, 24), "Molecular model", label_width=None, tooltip=None, default=None, choices=None)
        self._add("flag__model", "file_picker", "input", (145, 30, 225, 24), "Molecular model*", label_width=None, tooltip="PDB or PQR file", default="", choices=None)
        self._add("out_text_log", "text_output", "output", (10, 25, 280, 260), "log", label_width=None, tooltip=None, default=None, choices=None)
        self._add("out_table_simplices", "table_output", "output", (300, 25, 280, 260), "simplices", label_width=None, tooltip=None, default=None, choices=None)
        self._add("run", "run_button", "input", (10, 62, 120, 24), "Run", label_width=None, tooltip=None, default=None, choices=None)
        self._add("flag__alpha", "float_spin", "input", (10, 94, 340, 24), "Squared alpha value", label_width=140, tooltip=None, default="0", choices=None)
        self._add("flag__radius_offset", "float_spin", "input", (10, 126, 340, 24), "Radius offset", label_width=140, tooltip=None, default="1.4", choices=None)
        self._add("flag__boundary_only", "checkbox", "input", (10, 158, 340, 24), "Boundary simplices only", label_width=140, tooltip=None, default="false", choices=None)
        self._add("flag__dimension", "combo", "update", (10, 8, 340, 24), "Simplex dimension", label_width=140, tooltip=None, default="2", choices=["1", "2", "3"])
        self._add("flag__opacity", "float_spin", "update", (10, 40, 340, 24), "Opacity", label_width=140, tooltip=None, default="0.8", choices=None)
        self._add("flag__stats", "checkbox", "update", (10, 72, 340, 24), "Simplex statistics", label_width=140, tooltip=None, default="true", choices=None)
        self._add("viewer_frame", "viewer_frame", "viewer", (0, 0, 590, 310), "3D view", label_width=None, tooltip=None, default=None, choices=None)
        host_url = host_url or os.environ.get("SBL_PLUGIN_HOST", "http://127.0.0.1:8080")
        engine_hint = load_host_config(HERE)["engine_hint"]
        self.presenter = Presenter(load_spec(SPEC_FILE), self, host_url, engine_hint)
        self.root = pn.Column(*self._areas.values(), width=990, height=630, styles={"position": "relative"})

    def _area(self, area_id, title, geometry):
        x, y, w, h = geometry
        self._areas[area_id] = pn.Column(pn.pane.Markdown("**%s**" % title), **_placed(x, y, w, h))

    def _add(self, widget_id, kind, area, geometry, label, label_width=None, tooltip=None, default=None, choices=None):
        x, y, w, h = geometry
        if label_width:
            self._areas[area].append(pn.pane.Str(label, **_placed(x, y, label_width, h)))
            x, w = x + label_width, max(w - label_width, 1)
        name = "" if label_width else label
        place = _placed(x, y, w, h)
        if kind == "checkbox":
            widget = pn.widgets.Checkbox(name=name, value=default == "true", **place)
        elif kind in ("line_entry", "int_spin", "float_spin", "file_picker"):
            widget = pn.widgets.TextInput(name=name, value=default or "", **place)
        elif kind == "combo":
            options = ([""] if not default else []) + list(choices or [])
            widget = pn.widgets.Select(name=name, options=options, value=default or "", **place)
        elif kind == "run_button":
            widget = pn.widgets.Button(name=label or "Run", button_type="primary", **place)
            widget.on_click(lambda _event: self.presenter.on_run())
        elif kind == "label":
            widget = pn.pane.Str(label, **place)
        elif kind == "text_output":
            widget = pn.pane.Str("", **place)
        elif kind == "image_output":
            widget = pn.pane.HTML("", **place)
        elif kind in ("table_output", "html_output", "pdf_output", "viewer_frame"):
            widget = pn.pane.HTML("", **place)
        elif kind == "status_bar":
            widget = pn.pane.Str("", **place)
            self._status = widget
        else:
            raise ValueError("unknown widget kind %r" % kind)
        if tooltip and hasattr(widget, "description"):
            widget.description = tooltip
        if area == "update" and hasattr(widget, "value"):
            widget.param.watch(lambda _event: self.presenter.on_update_widget(widget_id), "value")
        self._areas[area].append(widget)
        self._widgets[widget_id] = widget
        self._kinds[widget_id] = kind

    def widget_ids(self):
        return list(self._widgets)

    def widget_values(self, widget_ids):
        return {i: self._widgets[i].value for i in widget_ids}

    def set_status(self, text):
        if self._status is not None:
            self._status.object = text

    def call_soon(self, fn):
        if self._doc is not None:
            self._doc.add_next_tick_callback(fn)
        else:
            fn()

    def show_artifact(self, slot, media, url, widget_id):
        widget = self._widgets[widget_id]
        if media == "image":
            widget.object = '<img src="%s" style="max-width:100%%;max-height:100%%">' % url
        elif media == "text":
            widget.object = _fetch_text(url)
        else:
            widget.object = '<iframe src="%s" style="width:100%%;height:100%%;border:0"></iframe>' % url

    def show_viewer(self, url):
        for widget_id, kind in self._kinds.items():
            if kind == "viewer_frame":
                self._widgets[widget_id].object = '<iframe src="%s" style="width:100%%;height:100%%;border:0"></iframe>' % url


def _fetch_text(url):
    import urllib.request

    with urllib.request.urlopen(url, timeout=10) as resp:
        return resp.read().decode("utf-8", "replace")


if __name__.startswith("bokeh"):
    View().root.servable(title="alpha_complex")
