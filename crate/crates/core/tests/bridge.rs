mod common;

use std::collections::{BTreeSet, HashMap};
use std::io::Read;
use std::net::TcpListener;
use std::path::Path;
use std::process::Command;
use std::thread;
use std::time::Duration;

use guigen_core::bridge::{
    next_reload, replay_files, resolve_port, send_visualize, BridgeError, MockViewerPeer, PeerMode,
    ReloadDescriptor, SocketConfig, DEFAULT_PORT,
};
use guigen_core::presenter::ArtifactManifest;
use proptest::prelude::*;

fn env(v: Option<&str>) -> HashMap<String, String> {
    v.map(|v| ("VMDSOCK".to_owned(), v.to_owned())).into_iter().collect()
}

#[test]
fn port_precedence_all_six_cases() {
    let cases: [(Option<i64>, Option<&str>, Option<u16>); 6] = [
        (None, None, Some(5555)),
        (None, Some("6000"), Some(6000)),
        (None, Some("not-a-port"), None),
        (Some(7000), None, Some(7000)),
        (Some(7000), Some("6000"), Some(7000)),
        (Some(7000), Some("not-a-port"), Some(7000)),
    ];
    for (explicit, var, want) in cases {
        let got = resolve_port(explicit, &env(var));
        match want {
            Some(p) => assert_eq!(got.unwrap(), p, "{explicit:?} {var:?}"),
            None => assert!(matches!(got, Err(BridgeError::BadPort { .. })), "{explicit:?} {var:?}"),
        }
    }
}

#[test]
fn out_of_range_ports_are_rejected() {
    for explicit in [0, -1, 65536] {
        assert!(matches!(resolve_port(Some(explicit), &env(None)), Err(BridgeError::BadPort { .. })));
    }
    for var in ["0", "65536", "99999999999999999999", "", "+6000", "6_000", "0x17"] {
        assert!(matches!(resolve_port(None, &env(Some(var))), Err(BridgeError::BadPort { .. })), "{var}");
    }
    assert_eq!(resolve_port(None, &env(Some("65535"))).unwrap(), 65535);
}

proptest! {
    #[test]
    fn explicit_port_always_wins(port in 1i64..=65535, var in ".*") {
        prop_assert_eq!(resolve_port(Some(port), &env(Some(&var))).unwrap() as i64, port);
    }

    #[test]
    fn env_port_wins_over_default(port in 1u16..=65535) {
        prop_assert_eq!(resolve_port(None, &env(Some(&port.to_string()))).unwrap(), port);
    }
}

/// Everything a single connection sends, read by a bare listener.
fn capture_one(send: impl FnOnce(SocketConfig)) -> Vec<u8> {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let cfg = SocketConfig::local(listener.local_addr().unwrap().port());
    let reader = thread::spawn(move || {
        let (mut conn, _) = listener.accept().unwrap();
        let mut bytes = Vec::new();
        conn.read_to_end(&mut bytes).unwrap();
        bytes
    });
    send(cfg);
    reader.join().unwrap()
}

#[test]
fn wire_bytes_are_exactly_one_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_path_buf();
    let bytes = capture_one(|cfg| {
        let report = send_visualize(&cfg, &out).unwrap();
        assert_eq!(report.ack, None);
    });
    let expected = format!("vmd_visualize_sbl_plugin {}\n", dir.path().display());
    assert_eq!(bytes, expected.as_bytes());
}

#[test]
fn mock_peer_records_one_line_per_send() {
    let peer = MockViewerPeer::bind(0, PeerMode::Silent).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let report = send_visualize(&peer.config(), dir.path()).unwrap();
    let lines = peer.wait_for(1, Duration::from_secs(5));
    assert_eq!(lines.len(), 1);
    assert!(lines[0].terminated);
    assert_eq!(lines[0].text(), format!("vmd_visualize_sbl_plugin {}", dir.path().display()));
    assert_eq!(report.bytes_sent, lines[0].raw.len() + 1);
}

#[test]
fn path_with_space_arrives_verbatim() {
    let peer = MockViewerPeer::bind(0, PeerMode::Ack).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let spaced = dir.path().join("run dir/post out");
    std::fs::create_dir_all(&spaced).unwrap();
    send_visualize(&peer.config(), &spaced).unwrap();
    let lines = peer.wait_for(1, Duration::from_secs(5));
    assert_eq!(lines[0].text(), format!("vmd_visualize_sbl_plugin {}", spaced.display()));
}

#[test]
fn silent_and_acking_peers_both_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let silent = MockViewerPeer::bind(0, PeerMode::Silent).unwrap();
    assert_eq!(send_visualize(&silent.config(), dir.path()).unwrap().ack, None);
    let acking = MockViewerPeer::bind(0, PeerMode::Ack).unwrap();
    assert_eq!(send_visualize(&acking.config(), dir.path()).unwrap().ack.as_deref(), Some("ok"));
}

#[test]
fn ten_concurrent_sends_stay_intact() {
    let peer = MockViewerPeer::bind(0, PeerMode::Ack).unwrap();
    let root = tempfile::tempdir().unwrap();
    let dirs: Vec<_> = (0..10)
        .map(|i| {
            let d = root.path().join(format!("session-{i}/post"));
            std::fs::create_dir_all(&d).unwrap();
            d
        })
        .collect();
    let cfg = peer.config();
    thread::scope(|s| {
        for d in &dirs {
            let cfg = cfg.clone();
            s.spawn(move || send_visualize(&cfg, d).unwrap());
        }
    });
    let lines = peer.wait_for(10, Duration::from_secs(5));
    assert_eq!(lines.len(), 10);
    let got: BTreeSet<String> = lines.iter().map(|l| l.text()).collect();
    let want: BTreeSet<String> = dirs.iter().map(|d| format!("vmd_visualize_sbl_plugin {}", d.display())).collect();
    assert_eq!(got, want);
    assert!(lines.iter().all(|l| l.terminated));
}

#[test]
fn no_listener_is_connect_refused() {
    let port = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let dir = tempfile::tempdir().unwrap();
    let err = send_visualize(&SocketConfig::local(port), dir.path()).unwrap_err();
    assert!(matches!(err, BridgeError::ConnectRefused(_)), "{err}");
}

#[test]
fn missing_directory_is_an_io_error() {
    let peer = MockViewerPeer::bind(0, PeerMode::Silent).unwrap();
    let err = send_visualize(&peer.config(), Path::new("/definitely/not/here")).unwrap_err();
    assert!(matches!(err, BridgeError::Io(_)));
    assert!(peer.transcript().is_empty());
}

#[test]
fn occupied_port_is_a_bind_failure() {
    let peer = MockViewerPeer::bind(0, PeerMode::Silent).unwrap();
    assert!(matches!(MockViewerPeer::bind(peer.port(), PeerMode::Silent), Err(BridgeError::BindFailure(_))));
}

#[test]
fn default_config_targets_loopback_5555() {
    let cfg = SocketConfig::default();
    assert_eq!((cfg.host.as_str(), cfg.port), ("127.0.0.1", DEFAULT_PORT));
    assert_eq!(cfg.connect_timeout, Duration::from_millis(5000));
}

#[test]
fn reload_nonces_strictly_increase_per_session() {
    let mut a = ReloadDescriptor::new("/viewer/");
    let mut b = ReloadDescriptor::new("/viewer/");
    let mut seen = BTreeSet::new();
    let mut last = 0;
    for _ in 0..1000 {
        a = next_reload(&a);
        let url = a.url();
        let v: u64 = url.rsplit_once("?v=").unwrap().1.parse().unwrap();
        assert!(v > last);
        last = v;
        assert!(seen.insert(url));
    }
    assert_eq!(a.url(), "/viewer/?v=1000");
    b = next_reload(&b);
    assert_eq!(b.url(), "/viewer/?v=1");
}

#[test]
fn replay_lists_molecular_viewer_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("scene.pdb"), "ATOM\n").unwrap();
    std::fs::write(dir.path().join("mesh.obj"), "v 0 0 0\n").unwrap();
    let manifest: ArtifactManifest = serde_json::from_str(
        r#"{"slots": {}, "viewer": [
            {"engine_hint": "molecular", "path": "scene.pdb"},
            {"engine_hint": "mesh", "path": "mesh.obj"}]}"#,
    )
    .unwrap();
    let files = replay_files(&manifest, dir.path()).unwrap();
    assert_eq!(files, [dir.path().join("scene.pdb")]);

    let escaping: ArtifactManifest =
        serde_json::from_str(r#"{"slots": {}, "viewer": [{"engine_hint": "molecular", "path": "../x.pdb"}]}"#).unwrap();
    assert!(replay_files(&escaping, dir.path()).is_err());
}

#[test]
fn desktop_runtime_sends_the_same_bytes() {
    let runtime = common::workspace_root().join("crates/core/templates/desktop");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("with space");
    std::fs::create_dir(&out).unwrap();
    let out_str = out.to_str().unwrap().to_owned();
    let bytes = capture_one(|cfg| {
        let status = Command::new("python3")
            .env("PYTHONDONTWRITEBYTECODE", "1")
            .arg("-c")
            .arg("import sys; sys.path.insert(0, sys.argv[1]); import presenter; presenter.send_visualize(sys.argv[2], port=int(sys.argv[3]))")
            .arg(&runtime)
            .arg(&out_str)
            .arg(cfg.port.to_string())
            .status()
            .unwrap();
        assert!(status.success());
    });
    assert_eq!(bytes, format!("vmd_visualize_sbl_plugin {out_str}\n").as_bytes());
}
