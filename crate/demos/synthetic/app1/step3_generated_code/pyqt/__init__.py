# PyMOL plugin entry point for "surface_areas".
# spec-digest: sha256:c6358b7c2a26f6c7b40d65dcc0eba905bd8414303a6eff4847133a600661b76f

_dialog = None


def __init_plugin__(app=None):
    from pymol.plugins import addmenuitemqt

    addmenuitemqt("surface_areas", run_plugin_gui)


def run_plugin_gui():
    global _dialog
    if _dialog is None:
        from .view import View

        _dialog = View()
    _dialog.show()
    _dialog.raise_()
