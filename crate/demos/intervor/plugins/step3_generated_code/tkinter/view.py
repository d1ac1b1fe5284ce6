# View of the "intervor" plugin for VMD (Tk).
# spec-digest: sha256:7a2c1895ac8aa0858c3a98ed8993e560b9f499999cbebb0e58309780b5568719
# Generated by gui-generator 0.1.0. Edit the spec and regenerate instead.

import csv
import os
import sys
import tkinter as tk
from tkinter import filedialog, ttk

HERE = os.path.dirname(os.path.abspath(__file__))
SPEC_FILE = os.path.join(HERE, "intervor.spec.json")
if HERE not in sys.path:
    sys.path.insert(0, HERE)

from presenter import Presenter, load_spec  # noqa: E402


class View(tk.Toplevel):
    def __init__(self, master=None):
        super().__init__(master)
        self.title("intervor")
        self.geometry("890x650")
        self._areas = {}
        self._widgets = {}
        self._kinds = {}
        self._vars = {}
        self._images = {}
        self._status = None
        self._area("input", "area_input", (10, 10, 420, 380))
        self._area("output", "area_output", (440, 10, 450, 380))
        self._area("update", "area_update", (10, 400, 420, 250))
        self._area("viewer", "area_viewer", (440, 400, 450, 250))
        self._add("lbl_pdb", "label", "input", (10, 30, 130, 24), "PDB file", label_width=None, tooltip=None, default=None, choices=None)
        self._add("flag__pdb_file", "file_picker", "input", (150, 30, 250, 24), "PDB file*", label_width=None, tooltip="Structure of the complex, both partners", default="", choices=None)
        self._add("flag__verbose", "checkbox", "input", (150, 62, 120, 24), "verbose", label_width=None, tooltip=None, default="", choices=None)
        self._add("run", "run_button", "input", (280, 62, 120, 28), "Run Intervor", label_width=None, tooltip=None, default=None, choices=None)
        self._add("out_text_log", "text_output", "output", (10, 25, 430, 120), "log", label_width=None, tooltip=None, default=None, choices=None)
        self._add("out_image_patch_areas", "image_output", "output", (10, 150, 210, 185), "patch_areas", label_width=None, tooltip="Interface patch areas per partner", default=None, choices=None)
        self._add("out_table_interface_stats", "table_output", "output", (230, 150, 210, 185), "interface_stats", label_width=None, tooltip=None, default=None, choices=None)
        self._add("status_bar", "status_bar", "output", (10, 345, 430, 24), "Idle", label_width=None, tooltip=None, default=None, choices=None)
        self._add("lbl_color_by", "label", "update", (10, 30, 130, 24), "Color by", label_width=None, tooltip=None, default=None, choices=None)
        self._add("flag__color_by", "combo", "update", (150, 30, 200, 24), "Color by", label_width=None, tooltip=None, default="partner", choices=["partner", "shelling-order", "curvature"])
        self._add("viewer_3d", "viewer_frame", "viewer", (5, 5, 440, 240), "viewer_3d", label_width=None, tooltip=None, default=None, choices=None)
        self._add("flag__partner_A", "line_entry", "input", (10, 98, 340, 24), "Chains of partner A", label_width=140, tooltip=None, default="A", choices=None)
        self._add("flag__partner_B", "line_entry", "input", (10, 130, 340, 24), "Chains of partner B", label_width=140, tooltip=None, default="B", choices=None)
        self._add("flag__probe_radius", "float_spin", "input", (10, 162, 340, 24), "Water probe radius", label_width=140, tooltip=None, default="1.4", choices=None)
        self._add("flag__with_interfacial_water", "checkbox", "input", (10, 194, 340, 24), "Include interfacial water", label_width=140, tooltip=None, default="false", choices=None)
        self._add("flag__max_shelling_order", "int_spin", "input", (10, 226, 340, 24), "Max shelling order", label_width=140, tooltip=None, default="4", choices=None)
        self._add("flag__histogram_bins", "int_spin", "update", (10, 62, 340, 24), "Histogram bins", label_width=140, tooltip=None, default="20", choices=None)
        self._add("flag__smoothing", "float_spin", "update", (10, 94, 340, 24), "Smoothing", label_width=140, tooltip=None, default="0.5", choices=None)
        self.presenter = Presenter(load_spec(SPEC_FILE), self, host="vmd", plugin_dir=HERE)

    def _area(self, area_id, title, geometry):
        x, y, w, h = geometry
        frame = tk.LabelFrame(self, text=title)
        frame.place(x=x, y=y, width=w, height=h)
        self._areas[area_id] = frame

    def _add(self, widget_id, kind, area, geometry, label, label_width=None, tooltip=None, default=None, choices=None):
        parent = self._areas[area]
        x, y, w, h = geometry
        if label_width:
            tk.Label(parent, text=label, anchor="w").place(x=x, y=y, width=label_width, height=h)
            x, w = x + label_width, max(w - label_width, 1)
        text = "" if label_width else label
        var = None
        if kind == "checkbox":
            var = tk.BooleanVar(value=default == "true")
            widget = tk.Checkbutton(parent, text=text, variable=var, anchor="w")
        elif kind in ("line_entry", "int_spin", "float_spin"):
            var = tk.StringVar(value=default or "")
            widget = tk.Entry(parent, textvariable=var)
        elif kind == "file_picker":
            var = tk.StringVar(value=default or "")
            widget = tk.Frame(parent)
            tk.Entry(widget, textvariable=var).pack(side="left", fill="both", expand=True)
            tk.Button(widget, text="...", command=lambda: self._browse(widget_id)).pack(side="right")
        elif kind == "combo":
            var = tk.StringVar(value=default or "")
            widget = ttk.Combobox(parent, textvariable=var, values=([""] if not default else []) + list(choices or []), state="readonly")
        elif kind == "run_button":
            widget = tk.Button(parent, text=label or "Run", command=lambda: self.presenter.on_run())
        elif kind == "label":
            widget = tk.Label(parent, text=label, anchor="w")
        elif kind in ("text_output", "html_output"):
            widget = tk.Text(parent, state="disabled", wrap="word")
        elif kind in ("image_output", "pdf_output", "viewer_frame"):
            widget = tk.Label(parent, text="Structures open in the VMD display" if kind == "viewer_frame" else "")
        elif kind == "table_output":
            widget = ttk.Treeview(parent, show="headings")
        elif kind == "status_bar":
            widget = tk.Label(parent, text="", anchor="w")
            self._status = widget
        else:
            raise ValueError("unknown widget kind %r" % kind)
        widget.place(x=x, y=y, width=w, height=h)
        if tooltip:
            _Tooltip(widget, tooltip)
        if var is not None:
            self._vars[widget_id] = var
            if area == "update":
                self._connect_update(widget_id, widget, kind)
        self._widgets[widget_id] = widget
        self._kinds[widget_id] = kind

    def _connect_update(self, widget_id, widget, kind):
        notify = lambda *_: self.presenter.on_update_widget(widget_id)
        if kind == "checkbox":
            widget.configure(command=notify)
        elif kind == "combo":
            widget.bind("<<ComboboxSelected>>", notify)
        else:
            widget.bind("<Return>", notify)
            widget.bind("<FocusOut>", notify)

    def _browse(self, widget_id):
        path = filedialog.askopenfilename(parent=self)
        if path:
            self._vars[widget_id].set(path)

    def widget_ids(self):
        return list(self._widgets)

    def widget_values(self, widget_ids):
        return {i: self._vars[i].get() for i in widget_ids}

    def set_status(self, text):
        if self._status is not None:
            self._status.configure(text=text)

    def call_soon(self, fn):
        self.after(0, fn)

    def show_artifact(self, slot, media, path, widget_id):
        widget = self._widgets[widget_id]
        if media in ("text", "html"):
            with open(path, encoding="utf-8", errors="replace") as f:
                content = f.read()
            widget.configure(state="normal")
            widget.delete("1.0", "end")
            widget.insert("1.0", content)
            widget.configure(state="disabled")
        elif media == "image":
            image = tk.PhotoImage(file=path)
            self._images[widget_id] = image
            widget.configure(image=image)
        elif media == "table":
            with open(path, newline="", encoding="utf-8", errors="replace") as f:
                rows = list(csv.reader(f))
            header, body = (rows[0], rows[1:]) if rows else ([], [])
            widget.delete(*widget.get_children())
            widget.configure(columns=header)
            for column in header:
                widget.heading(column, text=column)
            for row in body:
                widget.insert("", "end", values=row)
        elif media == "pdf":
            widget.configure(text=path)

    def show_viewer(self, entries, out_dir):
        pass


class _Tooltip:
    def __init__(self, widget, text):
        self._widget, self._text, self._tip = widget, text, None
        widget.bind("<Enter>", self._show)
        widget.bind("<Leave>", self._hide)

    def _show(self, _event):
        x, y = self._widget.winfo_rootx() + 10, self._widget.winfo_rooty() + self._widget.winfo_height()
        self._tip = tk.Toplevel(self._widget)
        self._tip.wm_overrideredirect(True)
        self._tip.wm_geometry("+%d+%d" % (x, y))
        tk.Label(self._tip, text=self._text, background="#ffffe0", relief="solid", borderwidth=1).pack()

    def _hide(self, _event):
        if self._tip is not None:
            self._tip.destroy()
            self._tip = None


_window = None


def open_window():
    global _window
    if _window is None or not _window.winfo_exists():
        root = tk._default_root or tk.Tk()
        if root is not None and not root.winfo_viewable():
            root.withdraw()
        _window = View(root)
    _window.deiconify()
    _window.lift()
    return _window
