# View of the "contact_mapper" plugin for PyMOL (Qt).
# spec-digest: sha256:f7e4dca9faf18050ea16395abd9a6100ae4e2c1f77118b01225062f370a8fb03
# Generated by gui-generator 0.1.0. Edit the spec and regenerate instead.

import csv
import os

try:
    from pymol.Qt import QtCore, QtGui, QtWidgets
except ImportError:
    from PyQt5 import QtCore, QtGui, QtWidgets

from .presenter import Presenter, load_spec

HERE = os.path.dirname(os.path.abspath(__file__))
SPEC_FILE = os.path.join(HERE, "contact_mapper.spec.json")


class View(QtWidgets.QWidget):
    def __init__(self, parent=None):
        super().__init__(parent)
        self.setWindowTitle("contact_mapper")
        self.resize(890, 590)
        self._areas = {}
        self._widgets = {}
        self._kinds = {}
        self._status = None
        self._invoke = _Invoker(self)
        self._area("input", "area_input", (10, 10, 360, 580))
        self._area("output", "area_output", (380, 10, 510, 300))
        self._area("update", "area_update", (380, 320, 255, 270))
        self._area("viewer", "area_viewer", (640, 320, 250, 270))
        self._add("out_text_log", "text_output", "output", (5, 20, 380, 100), "log", label_width=None, tooltip=None, default=None, choices=None)
        self._add("out_image_contact_map", "image_output", "output", (5, 125, 380, 160), "contact_map", label_width=None, tooltip=None, default=None, choices=None)
        self._add("run", "run_button", "input", (10, 8, 120, 24), "Run", label_width=None, tooltip=None, default=None, choices=None)
        self._add("flag__structure", "file_picker", "input", (10, 40, 340, 24), "Structure*", label_width=140, tooltip=None, default="", choices=None)
        self._add("flag__cutoff", "float_spin", "input", (10, 72, 340, 24), "Distance cutoff", label_width=140, tooltip=None, default="8.0", choices=None)
        self._add("flag__chains", "line_entry", "input", (10, 104, 340, 24), "Chains", label_width=140, tooltip=None, default="", choices=None)
        self._add("flag__heavy_only", "checkbox", "input", (10, 136, 340, 24), "Heavy atoms only", label_width=140, tooltip=None, default="true", choices=None)
        self._add("flag__threshold", "float_spin", "update", (10, 8, 340, 24), "Highlight threshold", label_width=140, tooltip=None, default="0.5", choices=None)
        self._add("viewer_frame", "viewer_frame", "viewer", (0, 0, 250, 270), "3D view", label_width=None, tooltip=None, default=None, choices=None)
        self.presenter = Presenter(load_spec(SPEC_FILE), self, host="pymol", plugin_dir=HERE)

    def _area(self, area_id, title, geometry):
        box = QtWidgets.QGroupBox(title, self)
        box.setGeometry(*geometry)
        self._areas[area_id] = box

    def _add(self, widget_id, kind, area, geometry, label, label_width=None, tooltip=None, default=None, choices=None):
        parent = self._areas[area]
        x, y, w, h = geometry
        if label_width:
            caption = QtWidgets.QLabel(label, parent)
            caption.setGeometry(x, y, label_width, h)
            x, w = x + label_width, max(w - label_width, 1)
        text = "" if label_width else label
        if kind == "checkbox":
            widget = QtWidgets.QCheckBox(text, parent)
            widget.setChecked(default == "true")
        elif kind in ("line_entry", "int_spin", "float_spin"):
            widget = QtWidgets.QLineEdit(default or "", parent)
            if kind == "int_spin":
                widget.setValidator(QtGui.QIntValidator(widget))
            elif kind == "float_spin":
                widget.setValidator(QtGui.QDoubleValidator(widget))
        elif kind == "file_picker":
            widget = _FilePicker(default or "", parent)
        elif kind == "combo":
            widget = QtWidgets.QComboBox(parent)
            if not default:
                widget.addItem("")
            widget.addItems(choices or [])
            widget.setCurrentText(default or "")
        elif kind == "run_button":
            widget = QtWidgets.QPushButton(label or "Run", parent)
            widget.clicked.connect(lambda: self.presenter.on_run())
        elif kind == "label":
            widget = QtWidgets.QLabel(label, parent)
        elif kind == "text_output":
            widget = QtWidgets.QPlainTextEdit(parent)
            widget.setReadOnly(True)
        elif kind == "image_output":
            widget = QtWidgets.QLabel(parent)
            widget.setAlignment(QtCore.Qt.AlignCenter)
        elif kind == "table_output":
            widget = QtWidgets.QTableWidget(parent)
        elif kind == "html_output":
            widget = QtWidgets.QTextBrowser(parent)
        elif kind == "pdf_output":
            widget = QtWidgets.QLabel(parent)
            widget.setOpenExternalLinks(True)
        elif kind == "viewer_frame":
            widget = QtWidgets.QLabel("Structures open in the PyMOL viewer", parent)
            widget.setAlignment(QtCore.Qt.AlignCenter)
        elif kind == "status_bar":
            widget = QtWidgets.QLabel("", parent)
            self._status = widget
        else:
            raise ValueError("unknown widget kind %r" % kind)
        widget.setGeometry(x, y, w, h)
        if tooltip:
            widget.setToolTip(tooltip)
        if area == "update":
            self._connect_update(widget_id, widget, kind)
        self._widgets[widget_id] = widget
        self._kinds[widget_id] = kind

    def _connect_update(self, widget_id, widget, kind):
        notify = lambda *_: self.presenter.on_update_widget(widget_id)
        if kind == "checkbox":
            widget.toggled.connect(notify)
        elif kind == "combo":
            widget.currentIndexChanged.connect(notify)
        elif kind == "file_picker":
            widget.edit.editingFinished.connect(notify)
        elif kind in ("line_entry", "int_spin", "float_spin"):
            widget.editingFinished.connect(notify)

    def widget_ids(self):
        return list(self._widgets)

    def widget_value(self, widget_id):
        widget, kind = self._widgets[widget_id], self._kinds[widget_id]
        if kind == "checkbox":
            return widget.isChecked()
        if kind == "combo":
            return widget.currentText()
        if kind == "file_picker":
            return widget.edit.text()
        return widget.text()

    def widget_values(self, widget_ids):
        return {i: self.widget_value(i) for i in widget_ids}

    def set_status(self, text):
        if self._status is not None:
            self._status.setText(text)

    def call_soon(self, fn):
        self._invoke.post(fn)

    def show_artifact(self, slot, media, path, widget_id):
        widget = self._widgets[widget_id]
        if media == "text":
            with open(path, encoding="utf-8", errors="replace") as f:
                widget.setPlainText(f.read())
        elif media == "image":
            pixmap = QtGui.QPixmap(path)
            widget.setPixmap(pixmap.scaled(widget.size(), QtCore.Qt.KeepAspectRatio))
        elif media == "table":
            with open(path, newline="", encoding="utf-8", errors="replace") as f:
                rows = list(csv.reader(f))
            header, body = (rows[0], rows[1:]) if rows else ([], [])
            widget.clear()
            widget.setColumnCount(len(header))
            widget.setHorizontalHeaderLabels(header)
            widget.setRowCount(len(body))
            for r, row in enumerate(body):
                for c, cell in enumerate(row):
                    widget.setItem(r, c, QtWidgets.QTableWidgetItem(cell))
        elif media == "html":
            widget.setSource(QtCore.QUrl.fromLocalFile(path))
        elif media == "pdf":
            widget.setText('<a href="%s">%s</a>' % (QtCore.QUrl.fromLocalFile(path).toString(), os.path.basename(path)))

    def show_viewer(self, entries, out_dir):
        from pymol import cmd

        for entry in entries:
            path = os.path.join(out_dir, entry["path"])
            if path.endswith((".py", ".pml")):
                cmd.run(path)
            else:
                cmd.load(path)


class _FilePicker(QtWidgets.QWidget):
    def __init__(self, text, parent):
        super().__init__(parent)
        layout = QtWidgets.QHBoxLayout(self)
        layout.setContentsMargins(0, 0, 0, 0)
        self.edit = QtWidgets.QLineEdit(text, self)
        browse = QtWidgets.QToolButton(self)
        browse.setText("...")
        browse.clicked.connect(self._browse)
        layout.addWidget(self.edit)
        layout.addWidget(browse)

    def _browse(self):
        path, _ = QtWidgets.QFileDialog.getOpenFileName(self, "Select file")
        if path:
            self.edit.setText(path)
            self.edit.editingFinished.emit()


class _Invoker(QtCore.QObject):
    _call = QtCore.pyqtSignal(object) if hasattr(QtCore, "pyqtSignal") else QtCore.Signal(object)

    def __init__(self, parent):
        super().__init__(parent)
        self._call.connect(lambda fn: fn(), QtCore.Qt.QueuedConnection)

    def post(self, fn):
        self._call.emit(fn)
