# PyMOL plugin entry point for "docking_scorer".
# spec-digest: sha256:0c827c9fc4221eafa9588a1fbf824632129e6d2a4649b9be007b9720b05532cd

_dialog = None


def __init_plugin__(app=None):
    from pymol.plugins import addmenuitemqt

    addmenuitemqt("docking_scorer", run_plugin_gui)


def run_plugin_gui():
    global _dialog
    if _dialog is None:
        from .view import View

        _dialog = View()
    _dialog.show()
    _dialog.raise_()
