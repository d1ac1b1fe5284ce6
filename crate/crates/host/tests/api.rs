use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use guigen_core::builder::build_from_documents;
use guigen_core::codegen::{generate, package, BackendId};
use guigen_core::presenter::RunConfig;
use guigen_core::spec::{GuiSpec, MetaBlock};
use guigen_host::{serve_on, HostConfig};
use serde_json::{json, Value};
use tempfile::TempDir;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn fixture(name: &str) -> PathBuf {
    root().join("fixtures").join(name)
}

fn intervor_spec() -> GuiSpec {
    let dir = root().join("demos/intervor/plugins/step1_design");
    let read = |n: &str| std::fs::read_to_string(dir.join(n)).unwrap();
    build_from_documents(
        &read("layout.ui"),
        &read("selected_flags.txt"),
        &read("update_area_flags.txt"),
        MetaBlock::new("intervor", "sbl-intervor-ABW-atomic.exe", "post_analysis.py"),
    )
    .unwrap()
}

fn widget_for(spec: &GuiSpec, token: &str) -> String {
    spec.flags.iter().find(|b| b.flag.token == token).unwrap().widget_id.clone()
}

struct Host {
    _tmp: TempDir,
    base: String,
    addr: SocketAddr,
    plugin_dir: PathBuf,
    sessions: PathBuf,
    spec: GuiSpec,
    client: reqwest::Client,
}

impl Host {
    async fn start(backend: BackendId, run: RunConfig) -> Self {
        let tmp = tempfile::tempdir().unwrap();
        let spec = intervor_spec();
        let tree = generate(&spec, backend).unwrap();
        let out = tmp.path().join("generated");
        package(&tree, &out).unwrap();
        let plugin_dir = out.join(backend.as_str());
        let sessions = tmp.path().join("sessions");
        let (cfg, loaded) = HostConfig::load(&plugin_dir, &sessions, run).unwrap();
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        tokio::spawn(serve_on(listener, cfg, loaded));
        Self {
            _tmp: tmp,
            base: format!("http://{addr}"),
            addr,
            plugin_dir,
            sessions,
            spec,
            client: reqwest::Client::new(),
        }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    async fn get(&self, path: &str) -> reqwest::Response {
        self.client.get(self.url(path)).send().await.unwrap()
    }

    async fn post(&self, path: &str, body: &Value) -> reqwest::Response {
        self.client.post(self.url(path)).json(body).send().await.unwrap()
    }

    fn state(&self, pdb: &str) -> Value {
        json!({ widget_for(&self.spec, "--pdb-file"): pdb })
    }

    async fn run(&self, state: &Value) -> String {
        let r = self.post("/api/run", state).await;
        assert_eq!(r.status(), 200);
        r.json::<Value>().await.unwrap()["session_id"].as_str().unwrap().to_owned()
    }

    async fn poll(&self, id: &str, limit: Duration) -> Value {
        let start = Instant::now();
        loop {
            let s: Value = self.get(&format!("/api/session/{id}")).await.json().await.unwrap();
            let state = s["state"].as_str().unwrap().to_owned();
            if state == "Ready" || state == "Failed" || start.elapsed() > limit {
                return s;
            }
            tokio::time::sleep(Duration::from_millis(20)).await;
        }
    }

    /// Raw request so the path reaches the server without client-side
    /// normalization of `..`.
    fn raw_get(&self, path: &str) -> u16 {
        let mut conn = TcpStream::connect(self.addr).unwrap();
        write!(conn, "GET {path} HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n").unwrap();
        let mut text = String::new();
        conn.read_to_string(&mut text).unwrap();
        text.split_whitespace().nth(1).unwrap().parse().unwrap()
    }
}

fn fake_run() -> RunConfig {
    let mut cfg = RunConfig::with_programs(fixture("echo_exe.py"), fixture("post_analysis.py"));
    cfg.timeout = Duration::from_secs(20);
    cfg.post_timeout = Duration::from_secs(20);
    cfg
}

#[tokio::test(flavor = "multi_thread")]
async fn spec_is_served_byte_equal() {
    let host = Host::start(BackendId::PanelNgljs, fake_run()).await;
    let r = host.get("/api/spec").await;
    assert_eq!(r.status(), 200);
    assert_eq!(r.headers()["content-type"], "application/json");
    let file = std::fs::read(host.plugin_dir.join("intervor.spec.json")).unwrap();
    assert_eq!(r.bytes().await.unwrap().as_ref(), file.as_slice());
}

#[tokio::test(flavor = "multi_thread")]
async fn fake_run_reaches_ready_within_two_seconds() {
    let host = Host::start(BackendId::PanelNgljs, fake_run()).await;
    let start = Instant::now();
    let id = host.run(&host.state("/data/1abc.pdb")).await;
    let s = host.poll(&id, Duration::from_secs(2)).await;
    assert!(start.elapsed() < Duration::from_secs(2), "{:?}", start.elapsed());
    assert_eq!(s["state"], "Ready", "{s}");
    assert_eq!(s["exit_code"], 0);
    assert_eq!(s["manifest"]["slots"]["log"]["path"], "log.txt");

    let log = host.get(&format!("/artifacts/{id}/log.txt")).await;
    assert_eq!(log.status(), 200);
    assert!(log.headers()["content-type"].to_str().unwrap().starts_with("text/plain"));
    assert!(log.text().await.unwrap().starts_with("post-analysis options:"));
    let png = host.get(&format!("/artifacts/{id}/patch_areas.png")).await;
    assert_eq!(png.headers()["content-type"], "image/png");

    let argv: Vec<String> =
        serde_json::from_slice(&std::fs::read(host.sessions.join(&id).join("argv.json")).unwrap()).unwrap();
    assert_eq!(&argv[..2], ["--pdb-file", "/data/1abc.pdb"]);
}

#[tokio::test(flavor = "multi_thread")]
async fn path_escape_requests_are_404() {
    let host = Host::start(BackendId::PanelNgljs, fake_run()).await;
    let id = host.run(&host.state("x.pdb")).await;
    assert_eq!(host.poll(&id, Duration::from_secs(5)).await["state"], "Ready");
    let run_dir = host.sessions.join(&id);
    std::fs::write(run_dir.join("secret"), "s").unwrap();
    std::os::unix::fs::symlink(run_dir.join("secret"), run_dir.join("post/link")).unwrap();

    assert_eq!(host.raw_get(&format!("/artifacts/{id}/log.txt")), 200);
    for path in [
        format!("/artifacts/{id}/../secret"),
        format!("/artifacts/{id}/%2e%2e/secret"),
        format!("/artifacts/{id}/%2E%2E%2Fsecret"),
        format!("/artifacts/{id}/post/../../secret"),
        format!("/artifacts/{id}/%2Fetc%2Fpasswd"),
        format!("/artifacts/{id}//etc/passwd"),
        format!("/artifacts/{id}/..%5Csecret"),
        format!("/artifacts/{id}/link"),
        format!("/artifacts/{id}/missing.txt"),
        "/artifacts/not-a-session/log.txt".to_owned(),
        format!("/artifacts/{}/log.txt", "0".repeat(32)),
    ] {
        assert_eq!(host.raw_get(&path), 404, "{path}");
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn eight_parallel_sessions_complete_independently() {
    let host = Host::start(BackendId::PanelNgljs, fake_run()).await;
    let runs = (0..8).map(|i| {
        let host = &host;
        async move {
            let pdb = format!("/data/complex-{i}.pdb");
            let id = host.run(&host.state(&pdb)).await;
            (pdb, id.clone(), host.poll(&id, Duration::from_secs(20)).await)
        }
    });
    let results = futures::future::join_all(runs).await;
    let mut ids: Vec<&str> = results.iter().map(|(_, id, _)| id.as_str()).collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), 8);
    for (pdb, id, status) in &results {
        assert_eq!(status["state"], "Ready", "{status}");
        let dir = host.sessions.join(id);
        let argv: Vec<String> = serde_json::from_slice(&std::fs::read(dir.join("argv.json")).unwrap()).unwrap();
        assert_eq!(&argv[1], pdb);
        assert_eq!(std::fs::read_to_string(dir.join("exe_calls")).unwrap().lines().count(), 1);
        assert_eq!(std::fs::read_to_string(dir.join("post_calls")).unwrap().lines().count(), 1);
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn update_while_running_is_409() {
    let mut run = RunConfig::with_programs(fixture("slow_exe.sh"), fixture("post_analysis.py"));
    run.timeout = Duration::from_secs(2);
    let host = Host::start(BackendId::PanelNgljs, run).await;
    let id = host.run(&host.state("x.pdb")).await;
    let s: Value = host.get(&format!("/api/session/{id}")).await.json().await.unwrap();
    assert_eq!(s["state"], "Running");
    let r = host
        .post("/api/update", &json!({ "session_id": id, "values": { "--histogram-bins": "5" } }))
        .await;
    assert_eq!(r.status(), 409);
    let failed = host.poll(&id, Duration::from_secs(10)).await;
    assert_eq!(failed["state"], "Failed");
    let r = host
        .post("/api/update", &json!({ "session_id": id, "values": { "--histogram-bins": "5" } }))
        .await;
    assert_eq!(r.status(), 409);
}

#[tokio::test(flavor = "multi_thread")]
async fn invalid_requests_are_400() {
    let host = Host::start(BackendId::PanelNgljs, fake_run()).await;
    let bad_json = host
        .client
        .post(host.url("/api/run"))
        .body("{not json")
        .send()
        .await
        .unwrap();
    assert_eq!(bad_json.status(), 400);
    assert_eq!(host.post("/api/run", &json!([1, 2])).await.status(), 400);
    assert_eq!(host.post("/api/run", &json!({ "nope": "x" })).await.status(), 400);
    assert_eq!(host.post("/api/run", &json!({})).await.status(), 400, "required file missing");
    let probe = widget_for(&host.spec, "--probe-radius");
    let mut state = host.state("x.pdb");
    state[&probe] = json!("wide");
    assert_eq!(host.post("/api/run", &state).await.status(), 400);
    assert!(std::fs::read_dir(&host.sessions).map(|d| d.count()).unwrap_or(0) == 0);

    let id = host.run(&host.state("x.pdb")).await;
    host.poll(&id, Duration::from_secs(5)).await;
    for values in [json!({ "--nope": "1" }), json!({ "--histogram-bins": "many" }), json!({ "--color-by": "red" })] {
        let r = host.post("/api/update", &json!({ "session_id": id, "values": values })).await;
        assert_eq!(r.status(), 400, "{values}");
    }
    assert_eq!(host.post("/api/update", &json!({ "values": {} })).await.status(), 400);
    let s: Value = host.get(&format!("/api/session/{id}")).await.json().await.unwrap();
    assert_eq!(s["state"], "Ready", "rejected updates leave the session alone");
}

#[tokio::test(flavor = "multi_thread")]
async fn unknown_sessions_are_404() {
    let host = Host::start(BackendId::PanelNgljs, fake_run()).await;
    assert_eq!(host.get("/api/session/abc").await.status(), 404);
    let r = host.post("/api/update", &json!({ "session_id": "abc", "values": {} })).await;
    assert_eq!(r.status(), 404);
}

#[tokio::test(flavor = "multi_thread")]
async fn missing_executable_is_500_with_failed_session() {
    let run = RunConfig::with_programs("/definitely/not/here.exe", fixture("post_analysis.py"));
    let host = Host::start(BackendId::PanelNgljs, run).await;
    let r = host.post("/api/run", &host.state("x.pdb")).await;
    assert_eq!(r.status(), 500);
    let body: Value = r.json().await.unwrap();
    let id = body["session_id"].as_str().unwrap();
    assert!(body["error"].as_str().unwrap().contains("not found"));
    let s: Value = host.get(&format!("/api/session/{id}")).await.json().await.unwrap();
    assert_eq!(s["state"], "Failed");
}

#[tokio::test(flavor = "multi_thread")]
async fn failing_executable_reports_exit_code_and_stderr() {
    let run = RunConfig::with_programs(fixture("failing_exe.sh"), fixture("post_analysis.py"));
    let host = Host::start(BackendId::PanelNgljs, run).await;
    let id = host.run(&host.state("x.pdb")).await;
    let s = host.poll(&id, Duration::from_secs(5)).await;
    assert_eq!(s["state"], "Failed");
    assert_eq!(s["exit_code"], 3);
    assert!(s["stderr_tail"].as_str().unwrap().contains("fatal: cannot read input"));
}

#[tokio::test(flavor = "multi_thread")]
async fn update_reruns_post_analysis_and_reports_refresh() {
    let host = Host::start(BackendId::PanelNgljs, fake_run()).await;
    let id = host.run(&host.state("x.pdb")).await;
    host.poll(&id, Duration::from_secs(5)).await;
    let cases = [
        (json!({ "--color-by": "curvature" }), json!(["viewer"]), 0),
        (json!({ "--histogram-bins": "7" }), json!(["outputs"]), 3),
        (json!({ "--color-by": "partner", "--smoothing": "0.1" }), json!(["outputs", "viewer"]), 3),
    ];
    for (values, targets, slots) in cases {
        let r = host.post("/api/update", &json!({ "session_id": id, "values": values })).await;
        assert_eq!(r.status(), 200);
        let body: Value = r.json().await.unwrap();
        assert_eq!(body["refresh"]["targets"], targets);
        assert_eq!(body["refresh"]["slots_to_refresh"].as_array().unwrap().len(), slots);
        assert_eq!(body["manifest"]["slots"]["log"]["path"], "log.txt");
    }
    let dir = host.sessions.join(&id);
    assert_eq!(std::fs::read_to_string(dir.join("exe_calls")).unwrap().lines().count(), 1);
    assert_eq!(std::fs::read_to_string(dir.join("post_calls")).unwrap().lines().count(), 4);
    let argv: Vec<String> = serde_json::from_slice(&std::fs::read(dir.join("post_argv.json")).unwrap()).unwrap();
    assert_eq!(argv, ["--color-by", "partner", "--histogram-bins", "7", "--smoothing", "0.1"]);
}

#[tokio::test(flavor = "multi_thread")]
async fn completed_sessions_stay_readable_after_restart() {
    let first = Host::start(BackendId::PanelNgljs, fake_run()).await;
    let id = first.run(&first.state("x.pdb")).await;
    first.poll(&id, Duration::from_secs(5)).await;
    let before = first.get(&format!("/artifacts/{id}/log.txt")).await.text().await.unwrap();

    let (cfg, loaded) = HostConfig::load(&first.plugin_dir, &first.sessions, fake_run()).unwrap();
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    tokio::spawn(serve_on(listener, cfg, loaded));
    let client = reqwest::Client::new();
    let after = client.get(format!("{base}/artifacts/{id}/log.txt")).send().await.unwrap();
    assert_eq!(after.status(), 200);
    assert_eq!(after.text().await.unwrap(), before);
    let status = client.get(format!("{base}/api/session/{id}")).send().await.unwrap();
    assert_eq!(status.status(), 404, "in-memory session state is not persisted");
}

#[tokio::test(flavor = "multi_thread")]
async fn viewer_page_follows_engine_hint() {
    for (backend, hint) in [(BackendId::PanelNgljs, "molecular"), (BackendId::PanelThreejs, "mesh")] {
        let host = Host::start(backend, fake_run()).await;
        let r = host.get("/viewer/?scene=abc&v=3").await;
        assert_eq!(r.status(), 200);
        let page = r.text().await.unwrap();
        assert!(page.contains(&format!(r#"data-engine="{hint}""#)), "{backend}");
        assert!(!page.contains("{{ENGINE_HINT}}"));
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn frontend_files_are_served() {
    let host = Host::start(BackendId::PanelNgljs, fake_run()).await;
    let index = host.get("/").await;
    assert_eq!(index.status(), 200);
    assert!(index.text().await.unwrap().contains("/api/spec"));
    assert_eq!(host.get("/assets/app.js").await.status(), 404);

    let front = tempfile::tempdir().unwrap();
    std::fs::create_dir(front.path().join("assets")).unwrap();
    std::fs::write(front.path().join("index.html"), "<p>built</p>").unwrap();
    std::fs::write(front.path().join("assets/app.js"), "console.log(1)").unwrap();
    std::fs::write(front.path().join("outside.txt"), "x").unwrap();
    let (mut cfg, loaded) = HostConfig::load(&host.plugin_dir, &host.sessions, fake_run()).unwrap();
    cfg.frontend_dir = Some(front.path().to_owned());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(serve_on(listener, cfg, loaded));
    let client = reqwest::Client::new();
    let get = |p: &str| client.get(format!("http://{addr}{p}")).send();
    assert_eq!(get("/").await.unwrap().text().await.unwrap(), "<p>built</p>");
    let js = get("/assets/app.js").await.unwrap();
    assert_eq!(js.headers()["content-type"], "text/javascript");
    assert_eq!(get("/assets/%2e%2e/outside.txt").await.unwrap().status(), 404);
}

#[tokio::test(flavor = "multi_thread")]
async fn host_config_problems_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = intervor_spec();
    package(&generate(&spec, BackendId::PanelThreejs).unwrap(), tmp.path()).unwrap();
    let dir = tmp.path().join("panel-threejs");
    let sessions = tmp.path().join("s");
    let (cfg, _) = HostConfig::load(&dir, &sessions, RunConfig::default()).unwrap();
    assert_eq!(cfg.engine_hint.as_str(), "mesh");
    assert_eq!(cfg.spec_path(), dir.join("intervor.spec.json"));

    std::fs::write(dir.join("host-config.json"), r#"{"engine_hint": "mesh"}"#).unwrap();
    assert!(HostConfig::load(&dir, &sessions, RunConfig::default()).is_ok(), "spec found by suffix");
    std::fs::write(dir.join("host-config.json"), r#"{"engine_hint": "volume"}"#).unwrap();
    assert!(HostConfig::load(&dir, &sessions, RunConfig::default()).is_err());
    std::fs::write(dir.join("host-config.json"), r#"{"engine_hint": "mesh", "spec_file": "../x.json"}"#).unwrap();
    assert!(HostConfig::load(&dir, &sessions, RunConfig::default()).is_err());
    std::fs::write(dir.join("host-config.json"), r#"{"engine_hint": "mesh"}"#).unwrap();
    std::fs::write(dir.join("intervor.spec.json"), "{}").unwrap();
    assert!(HostConfig::load(&dir, &sessions, RunConfig::default()).is_err());
}

#[tokio::test(flavor = "multi_thread")]
async fn web_runtime_client_drives_the_host() {
    let host = Host::start(BackendId::PanelNgljs, fake_run()).await;
    let pdb_widget = widget_for(&host.spec, "--pdb-file");
    let script = r#"
import json, sys, time
sys.path.insert(0, sys.argv[1])
import presenter
client = presenter.HostClient(sys.argv[2])
spec = client.spec()
sid = client.run({sys.argv[3]: "/data/1abc.pdb"})
status = client.wait(sid, deadline=time.monotonic() + 10)
update = client.update(sid, {"--color-by": "curvature"})
try:
    client.session("0" * 32)
    missing = None
except presenter.HostError as e:
    missing = e.status
print(json.dumps({"app": spec["meta"]["app_name"], "state": status["state"],
                  "targets": update["refresh"]["targets"], "missing": missing}))
"#;
    let plugin_dir = host.plugin_dir.clone();
    let base = host.base.clone();
    let out = tokio::task::spawn_blocking(move || {
        Command::new("python3")
            .env("PYTHONDONTWRITEBYTECODE", "1")
            .arg("-c")
            .arg(script)
            .arg(&plugin_dir)
            .arg(&base)
            .arg(&pdb_widget)
            .output()
            .unwrap()
    })
    .await
    .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let got: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(got, json!({ "app": "intervor", "state": "Ready", "targets": ["viewer"], "missing": 404 }));
}
