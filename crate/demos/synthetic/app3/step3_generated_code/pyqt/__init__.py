# PyMOL plugin entry point for "report_builder".
# spec-digest: sha256:b487ffc183a410476faceedc73cd2068bb2d4d724104bb4f6e7ea076da1d5d3d

_dialog = None


def __init_plugin__(app=None):
    from pymol.plugins import addmenuitemqt

    addmenuitemqt("report_builder", run_plugin_gui)


def run_plugin_gui():
    global _dialog
    if _dialog is None:
        from .view import View

        _dialog = View()
    _dialog.show()
    _dialog.raise_()
