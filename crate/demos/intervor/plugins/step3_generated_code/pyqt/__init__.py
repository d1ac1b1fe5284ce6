# PyMOL plugin entry point for "intervor".
# spec-digest: sha256:7a2c1895ac8aa0858c3a98ed8993e560b9f499999cbebb0e58309780b5568719

_dialog = None


def __init_plugin__(app=None):
    from pymol.plugins import addmenuitemqt

    addmenuitemqt("intervor", run_plugin_gui)


def run_plugin_gui():
    global _dialog
    if _dialog is None:
        from .view import View

        _dialog = View()
    _dialog.show()
    _dialog.raise_()
