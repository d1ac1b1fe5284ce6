"""Presenter and model runtime shared by the desktop plugins.

The view only reports widget values and displays results. Commands, runs,
post-analysis and refresh decisions are handled here, driven by the spec.

Run as a script for headless checks:

    python3 presenter.py argv <spec.json> <state.json>
    python3 presenter.py refresh <spec.json> <changed-tokens.json>
"""

import json
import math
import os
import re
import shutil
import socket
import subprocess
import sys
import threading
import time
import uuid

STDERR_TAIL_BYTES = 64 * 1024
DEFAULT_TIMEOUT = 600.0
MANIFEST_FILE = "manifest.json"
POST_DIR = "post"
DEFAULT_VIEWER_PORT = 5555
VISUALIZE_VERB = "vmd_visualize_sbl_plugin"

IDLE, RUNNING, POST_ANALYSIS, READY, FAILED = "Idle", "Running", "PostAnalysis", "Ready", "Failed"
LEGAL = {
    (IDLE, RUNNING),
    (RUNNING, POST_ANALYSIS),
    (RUNNING, FAILED),
    (POST_ANALYSIS, READY),
    (POST_ANALYSIS, FAILED),
    (READY, POST_ANALYSIS),
}


class PresenterError(Exception):
    kind = "PresenterError"


class UnknownWidget(PresenterError):
    kind = "UnknownWidget"


class StateTypeMismatch(PresenterError):
    kind = "StateTypeMismatch"


class MissingRequiredFile(PresenterError):
    kind = "MissingRequiredFile"


class ExeNotFound(PresenterError):
    kind = "ExeNotFound"


class Timeout(PresenterError):
    kind = "Timeout"


class PostScriptFailure(PresenterError):
    kind = "PostScriptFailure"


class ManifestMissing(PresenterError):
    kind = "ManifestMissing"


class ManifestInvalid(PresenterError):
    kind = "ManifestInvalid"


class NotReady(PresenterError):
    kind = "NotReady"


class UnknownUpdateFlag(PresenterError):
    kind = "UnknownUpdateFlag"


def load_spec(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


_INT = re.compile(r"[+-]?[0-9]+\Z")
_DECIMAL = re.compile(r"[+-]?([0-9]+\.?[0-9]*|\.[0-9]+)([eE][+-]?[0-9]+)?\Z")


def _fits(flag, text):
    if text == "":
        return True
    kind = flag["kind"]
    if kind == "int":
        return bool(_INT.match(text)) and -(2**63) <= int(text) < 2**63
    if kind == "float":
        return bool(_DECIMAL.match(text)) and math.isfinite(float(text))
    if kind == "enum":
        return text in flag.get("choices", [])
    if kind == "bool":
        return text in ("true", "false")
    return True


def _is_required_file(flag):
    return flag["kind"] == "infile" and flag["default"] == "" and flag["label"].rstrip().endswith("*")


def check_state(spec, state):
    bound = {b["widget_id"]: b["flag"] for b in spec["flags"]}
    for widget_id in sorted(state):
        if widget_id not in bound:
            raise UnknownWidget(widget_id)
    for binding in spec["flags"]:
        widget_id, flag = binding["widget_id"], binding["flag"]
        if widget_id not in state:
            continue
        value = state[widget_id]
        if flag["kind"] == "bool":
            if not isinstance(value, bool):
                raise StateTypeMismatch("%s expects a boolean" % widget_id)
        elif not isinstance(value, str) or not _fits(flag, value.strip()):
            raise StateTypeMismatch("%s expects %s text" % (widget_id, flag["kind"]))


def _contribution(flag, value):
    if value is True:
        return [flag["token"]]
    if isinstance(value, str) and value.strip():
        return [flag["token"], value.strip()]
    return []


def build_command(spec, state):
    """argv for the executable: exe, then each input flag in spec order."""
    check_state(spec, state)
    argv = [spec["meta"]["exe"]]
    for binding in spec["flags"]:
        flag, value = binding["flag"], state.get(binding["widget_id"])
        if _is_required_file(flag) and not (isinstance(value, str) and value.strip()):
            raise MissingRequiredFile(flag["token"])
        argv += _contribution(flag, value)
    return argv


def post_args(spec, run_dir, out_dir, values):
    args = ["--run-dir", run_dir, "--out-dir", out_dir]
    for binding in spec["update_flags"]:
        flag = binding["flag"]
        value = values.get(flag["token"])
        if value is not None and flag["kind"] == "bool":
            value = value.strip() == "true"
        args += _contribution(flag, value)
    return args


def refresh_set(spec, changed_tokens):
    by_token = {b["flag"]["token"]: b for b in spec["update_flags"]}
    targets = set()
    for token in changed_tokens:
        if token not in by_token:
            raise UnknownUpdateFlag(token)
        targets.update(by_token[token]["refresh"])
    slots = []
    if "outputs" in targets:
        slots = [w["slot"]["slot_name"] for w in spec["widgets"] if w.get("slot")]
    return {"targets": sorted(targets), "slots_to_refresh": slots}


def _inside(base, rel):
    if not rel or rel.startswith("/") or "\\" in rel:
        return None
    if any(part == ".." for part in rel.split("/")):
        return None
    full = os.path.realpath(os.path.join(base, rel))
    root = os.path.realpath(base)
    if full != root and not full.startswith(root + os.sep):
        return None
    return full


def load_manifest(out_dir, spec):
    path = os.path.join(out_dir, MANIFEST_FILE)
    if not os.path.isfile(path):
        raise ManifestMissing(path)
    try:
        with open(path, encoding="utf-8") as f:
            manifest = json.load(f)
    except ValueError as e:
        raise ManifestInvalid("MALFORMED: %s" % e)
    media = {w["slot"]["slot_name"]: w["slot"]["media"] for w in spec["widgets"] if w.get("slot")}
    problems = []
    for name, artifact in sorted(manifest.get("slots", {}).items()):
        if name not in media:
            problems.append("UNKNOWN_SLOT: %s" % name)
        elif media[name] != artifact.get("media"):
            problems.append("MEDIA_MISMATCH: %s" % name)
        full = _inside(out_dir, artifact.get("path", ""))
        if full is None:
            problems.append("PATH_ESCAPE: %s" % artifact.get("path"))
        elif not os.path.isfile(full):
            problems.append("MISSING_ARTIFACT: %s" % artifact.get("path"))
    for entry in manifest.get("viewer", []):
        full = _inside(out_dir, entry.get("path", ""))
        if full is None:
            problems.append("PATH_ESCAPE: %s" % entry.get("path"))
        elif not os.path.isfile(full):
            problems.append("MISSING_ARTIFACT: %s" % entry.get("path"))
    if problems:
        raise ManifestInvalid("; ".join(problems))
    manifest.setdefault("slots", {})
    manifest.setdefault("viewer", [])
    return manifest


def resolve_program(name):
    if os.path.dirname(name):
        path = os.path.abspath(name)
        if os.path.isfile(path):
            return path
        raise ExeNotFound(name)
    found = shutil.which(name)
    if found is None:
        raise ExeNotFound(name)
    return found


def _invocation(program):
    if program.endswith(".py"):
        return [sys.executable or "python3", program]
    if program.endswith(".sh"):
        return ["sh", program]
    return [program]


def run_process(program, args, workdir, stdout_path, timeout):
    started = time.monotonic()
    with open(stdout_path, "wb") as out:
        try:
            proc = subprocess.Popen(
                _invocation(program) + list(args),
                cwd=workdir,
                stdin=subprocess.DEVNULL,
                stdout=out,
                stderr=subprocess.PIPE,
            )
        except FileNotFoundError:
            raise ExeNotFound(program)
        try:
            _, err = proc.communicate(timeout=timeout)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.communicate()
            raise Timeout("%s exceeded %ss" % (program, timeout))
    tail = err[-STDERR_TAIL_BYTES:].decode("utf-8", "replace")
    return proc.returncode, tail, time.monotonic() - started


def resolve_port(explicit=None, env=None):
    if explicit is not None:
        port = int(explicit)
    else:
        raw = (os.environ if env is None else env).get("VMDSOCK")
        if raw is None:
            port = DEFAULT_VIEWER_PORT
        elif re.match(r"[0-9]+\Z", raw.strip()):
            port = int(raw.strip())
        else:
            raise ValueError("VMDSOCK is not a decimal number: %r" % raw)
    if not 1 <= port <= 65535:
        raise ValueError("port out of range: %d" % port)
    return port


def send_visualize(out_dir, host="127.0.0.1", port=None, timeout=5.0):
    """Send one visualize line to the viewer's socket listener."""
    if "\n" in out_dir or "\r" in out_dir:
        raise ValueError("line break in directory name: %r" % out_dir)
    line = ("%s %s\n" % (VISUALIZE_VERB, out_dir)).encode("ascii")
    with socket.create_connection((host, resolve_port(port)), timeout=timeout) as conn:
        conn.sendall(line)
        conn.shutdown(socket.SHUT_WR)
        try:
            ack = conn.recv(256).decode("ascii", "replace").strip() or None
        except socket.timeout:
            ack = None
    return {"bytes_sent": len(line), "ack": ack}


class RunSession:
    def __init__(self, spec, session_root):
        self.spec = spec
        self.id = uuid.uuid4().hex
        self.state = IDLE
        self.run_dir = os.path.join(session_root, self.id)
        os.makedirs(self.run_dir)
        self.manifest = None
        self.exit_code = None
        self.stderr_tail = ""
        self.error = None
        self.update_values = {b["flag"]["token"]: b["flag"]["default"] for b in spec["update_flags"]}

    @property
    def out_dir(self):
        return os.path.join(self.run_dir, POST_DIR)

    def _move(self, to):
        if (self.state, to) not in LEGAL:
            raise PresenterError("illegal transition %s -> %s" % (self.state, to))
        self.state = to

    def _fail(self, err):
        self.error = str(err) or err.kind
        self.state = FAILED
        return err

    def run(self, argv, exe_program, post_program, timeout=DEFAULT_TIMEOUT):
        self._move(RUNNING)
        try:
            code, tail, _ = run_process(
                exe_program, argv[1:], self.run_dir, os.path.join(self.run_dir, "stdout.txt"), timeout
            )
        except PresenterError as e:
            raise self._fail(e)
        self.exit_code, self.stderr_tail = code, tail
        if code != 0:
            self.error = "executable exited with status %s" % code
            self._move(FAILED)
            return
        self._move(POST_ANALYSIS)
        self.post(post_program, {}, timeout)

    def post(self, post_program, values, timeout=DEFAULT_TIMEOUT):
        if self.state == READY:
            self._move(POST_ANALYSIS)
        elif self.state != POST_ANALYSIS:
            raise NotReady(self.state)
        self.update_values.update(values)
        os.makedirs(self.out_dir, exist_ok=True)
        stale = os.path.join(self.out_dir, MANIFEST_FILE)
        if os.path.exists(stale):
            os.remove(stale)
        args = post_args(self.spec, self.run_dir, self.out_dir, self.update_values)
        try:
            code, tail, _ = run_process(
                post_program, args, self.run_dir, os.path.join(self.run_dir, "post.stdout.txt"), timeout
            )
            if code != 0:
                raise PostScriptFailure("post-analysis exited with status %s: %s" % (code, tail.strip()))
            manifest = load_manifest(self.out_dir, self.spec)
        except PresenterError as e:
            raise self._fail(e)
        self.manifest = manifest
        self.error = None
        self._move(READY)
        return manifest


class Presenter:
    """Connects a view to runs of the wrapped executable.

    The view provides `widget_values(ids)`, `set_status(text)`,
    `show_artifact(slot, media, path, widget_id)`,
    `show_viewer(entries, out_dir)` and `call_soon(fn)`, which runs `fn` on
    its UI thread. It calls `on_run()` and `on_update_widget(widget_id)`.
    """

    def __init__(self, spec, view, host, plugin_dir, session_root=None, exe=None, post_script=None):
        self.spec = spec
        self.view = view
        self.host = host
        self.session_root = session_root or os.path.join(
            os.path.expanduser("~"), ".sbl-plugins", spec["meta"]["app_name"]
        )
        self.exe = exe
        self.post_script = post_script or os.path.join(plugin_dir, spec["meta"]["post_script"])
        self.session = None
        self._lock = threading.Lock()
        self._slot_widgets = {w["slot"]["slot_name"]: w["id"] for w in spec["widgets"] if w.get("slot")}
        self._update_by_widget = {b["widget_id"]: b["flag"] for b in spec["update_flags"]}

    def _programs(self):
        return resolve_program(self.exe or self.spec["meta"]["exe"]), resolve_program(self.post_script)

    def on_run(self):
        ids = [b["widget_id"] for b in self.spec["flags"]]
        try:
            argv = build_command(self.spec, self.view.widget_values(ids))
        except PresenterError as e:
            self.view.set_status("%s: %s" % (e.kind, e))
            return
        if not self._lock.acquire(blocking=False):
            self.view.set_status("A run is already in progress")
            return
        self.view.set_status("Running " + " ".join(argv))
        threading.Thread(target=self._run, args=(argv,), daemon=True).start()

    def _run(self, argv):
        try:
            os.makedirs(self.session_root, exist_ok=True)
            session = RunSession(self.spec, self.session_root)
            self.session = session
            exe, post = self._programs()
            session.run(argv, exe, post)
        except PresenterError as e:
            message = "%s: %s" % (e.kind, e)
            self.view.call_soon(lambda: self.view.set_status(message))
            return
        finally:
            self._lock.release()
        everything = {"targets": ["outputs", "viewer"], "slots_to_refresh": sorted(self._slot_widgets)}
        self.view.call_soon(lambda: self._show(session, everything))

    def on_update_widget(self, widget_id):
        flag = self._update_by_widget[widget_id]
        value = self.view.widget_values([widget_id])[widget_id]
        if isinstance(value, bool):
            value = "true" if value else "false"
        self.on_update({flag["token"]: value})

    def on_update(self, changed):
        session = self.session
        if session is None or session.state != READY:
            self.view.set_status("Run the executable before updating")
            return
        try:
            refresh = refresh_set(self.spec, list(changed))
            _, post = self._programs()
            session.post(post, changed)
        except PresenterError as e:
            self.view.set_status("%s: %s" % (e.kind, e))
            return
        self._show(session, refresh)

    def _show(self, session, refresh):
        if session.state != READY:
            self.view.set_status(
                "Failed (exit %s): %s %s" % (session.exit_code, session.error, session.stderr_tail[-400:])
            )
            return
        for name in refresh["slots_to_refresh"]:
            artifact = session.manifest["slots"].get(name)
            if artifact is not None:
                path = os.path.join(session.out_dir, artifact["path"])
                self.view.show_artifact(name, artifact["media"], path, self._slot_widgets[name])
        if "viewer" in refresh["targets"] and session.manifest["viewer"]:
            self.view.show_viewer(session.manifest["viewer"], session.out_dir)
            if self.host == "vmd":
                try:
                    send_visualize(session.out_dir)
                except OSError as e:
                    self.view.set_status("Viewer not reachable: %s" % e)
                    return
        self.view.set_status("Ready")


def _main(argv):
    if len(argv) == 4 and argv[1] in ("argv", "refresh"):
        spec = load_spec(argv[2])
        with open(argv[3], encoding="utf-8") as f:
            data = json.load(f)
        try:
            result = build_command(spec, data) if argv[1] == "argv" else refresh_set(spec, data)
        except PresenterError as e:
            result = {"error": e.kind}
        print(json.dumps(result))
        return 0
    sys.stderr.write(__doc__)
    return 2


if __name__ == "__main__":
    sys.exit(_main(sys.argv))
