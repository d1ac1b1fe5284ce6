# PyMOL plugin entry point for "contact_mapper".
# spec-digest: sha256:f7e4dca9faf18050ea16395abd9a6100ae4e2c1f77118b01225062f370a8fb03

_dialog = None


def __init_plugin__(app=None):
    from pymol.plugins import addmenuitemqt

    addmenuitemqt("contact_mapper", run_plugin_gui)


def run_plugin_gui():
    global _dialog
    if _dialog is None:
        from .view import View

        _dialog = View()
    _dialog.show()
    _dialog.raise_()
