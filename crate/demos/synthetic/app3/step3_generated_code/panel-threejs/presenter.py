"""Presenter runtime shared by the web plugins.

Runs, post-analysis and artifact storage happen in the plugin host; this
module forwards raw widget values to it over HTTP, polls the session and
tells the view what to redisplay. No command building happens here.
"""

import json
import os
import threading
import time
import urllib.error
import urllib.parse
import urllib.request

POLL_INTERVAL = 0.5
POLL_BACKOFF = 1.5
POLL_MAX_INTERVAL = 4.0
TERMINAL = ("Ready", "Failed")


class HostError(Exception):
    def __init__(self, status, message):
        super().__init__("%s: %s" % (status, message))
        self.status = status


def load_spec(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def load_host_config(plugin_dir):
    with open(os.path.join(plugin_dir, "host-config.json"), encoding="utf-8") as f:
        return json.load(f)


class HostClient:
    def __init__(self, base_url, timeout=10.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def _request(self, method, path, body=None):
        data = None if body is None else json.dumps(body).encode("utf-8")
        req = urllib.request.Request(self.base_url + path, data=data, method=method)
        if data is not None:
            req.add_header("Content-Type", "application/json")
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                return json.loads(resp.read().decode("utf-8"))
        except urllib.error.HTTPError as e:
            raise HostError(e.code, e.read().decode("utf-8", "replace"))

    def spec(self):
        return self._request("GET", "/api/spec")

    def run(self, state):
        return self._request("POST", "/api/run", state)["session_id"]

    def session(self, session_id):
        return self._request("GET", "/api/session/" + urllib.parse.quote(session_id))

    def update(self, session_id, values):
        return self._request("POST", "/api/update", {"session_id": session_id, "values": values})

    def artifact_url(self, session_id, path):
        return "%s/artifacts/%s/%s" % (self.base_url, urllib.parse.quote(session_id), urllib.parse.quote(path))

    def wait(self, session_id, deadline=None):
        interval = POLL_INTERVAL
        while True:
            status = self.session(session_id)
            if status["state"] in TERMINAL:
                return status
            if deadline is not None and time.monotonic() > deadline:
                return status
            time.sleep(interval)
            interval = min(interval * POLL_BACKOFF, POLL_MAX_INTERVAL)


class ReloadDescriptor:
    """Cache-busting viewer URL; each call to `next()` bumps the nonce."""

    def __init__(self, base_url, nonce=0):
        self.base_url = base_url
        self.nonce = nonce

    def next(self):
        return ReloadDescriptor(self.base_url, self.nonce + 1)

    def url(self, scene=None):
        query = {"v": self.nonce} if scene is None else {"scene": scene, "v": self.nonce}
        return "%s?%s" % (self.base_url, urllib.parse.urlencode(query))


class Presenter:
    """Connects a web view to the plugin host.

    The view provides `widget_values(ids)`, `set_status(text)`,
    `show_artifact(slot, media, url, widget_id)`, `show_viewer(url)` and
    `call_soon(fn)`. It calls `on_run()` and `on_update_widget(widget_id)`.
    """

    def __init__(self, spec, view, host_url, engine_hint):
        self.spec = spec
        self.view = view
        self.client = HostClient(host_url)
        self.engine_hint = engine_hint
        self.session_id = None
        self.reload = ReloadDescriptor(self.client.base_url + "/viewer/")
        self._busy = threading.Lock()
        self._slot_widgets = {w["slot"]["slot_name"]: w["id"] for w in spec["widgets"] if w.get("slot")}
        self._update_by_widget = {b["widget_id"]: b["flag"] for b in spec["update_flags"]}

    def on_run(self):
        if not self._busy.acquire(blocking=False):
            self.view.set_status("A run is already in progress")
            return
        state = self.view.widget_values([b["widget_id"] for b in self.spec["flags"]])
        threading.Thread(target=self._run, args=(state,), daemon=True).start()

    def _run(self, state):
        try:
            session_id = self.client.run(state)
            self.session_id = session_id
            self.view.call_soon(lambda: self.view.set_status("Running"))
            status = self.client.wait(session_id)
        except (HostError, OSError) as e:
            message = str(e)
            self.view.call_soon(lambda: self.view.set_status(message))
            return
        finally:
            self._busy.release()
        refresh = {"targets": ["outputs", "viewer"], "slots_to_refresh": sorted(self._slot_widgets)}
        self.view.call_soon(lambda: self._show(status, refresh))

    def on_update_widget(self, widget_id):
        flag = self._update_by_widget[widget_id]
        value = self.view.widget_values([widget_id])[widget_id]
        if isinstance(value, bool):
            value = "true" if value else "false"
        self.on_update({flag["token"]: value})

    def on_update(self, values):
        if self.session_id is None:
            self.view.set_status("Run the executable before updating")
            return
        try:
            result = self.client.update(self.session_id, values)
        except (HostError, OSError) as e:
            self.view.set_status(str(e))
            return
        self._show({"state": "Ready", "manifest": result["manifest"]}, result["refresh"])

    def _show(self, status, refresh):
        if status["state"] != "Ready":
            self.view.set_status(
                "Failed (exit %s): %s %s"
                % (status.get("exit_code"), status.get("error", ""), status.get("stderr_tail", "")[-400:])
            )
            return
        manifest = status["manifest"]
        for name in refresh["slots_to_refresh"]:
            artifact = manifest["slots"].get(name)
            if artifact is not None:
                url = self.client.artifact_url(self.session_id, artifact["path"])
                self.view.show_artifact(name, artifact["media"], url, self._slot_widgets[name])
        if "viewer" in refresh["targets"] and manifest["viewer"]:
            self.reload = self.reload.next()
            self.view.show_viewer(self.reload.url(scene=self.session_id))
        self.view.set_status("Ready")
