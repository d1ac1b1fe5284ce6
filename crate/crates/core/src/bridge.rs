//! Viewer communication: the line-oriented socket client for the molecular
//! viewer host, cache-busting reload descriptors for the web viewer, and a
//! mock socket peer that records what it receives.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant, SystemTime};

use serde::Serialize;
use thiserror::Error;

use crate::presenter::{resolve_within, ArtifactManifest, EngineHint};

pub const VISUALIZE_VERB: &str = "vmd_visualize_sbl_plugin";
pub const PORT_ENV: &str = "VMDSOCK";
pub const DEFAULT_PORT: u16 = 5555;
pub const DEFAULT_HOST: &str = "127.0.0.1";
pub const DEFAULT_CONNECT_TIMEOUT: Duration = Duration::from_millis(5000);
/// Longest ack line read back from the viewer.
const MAX_ACK: u64 = 4096;

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("bad port {value:?}: {reason}")]
    BadPort { value: String, reason: &'static str },
    #[error("bad viewer command: {0}")]
    BadCommand(String),
    #[error("connection to {0} refused")]
    ConnectRefused(SocketAddr),
    #[error("timed out talking to {0}")]
    Timeout(String),
    #[error("cannot bind mock peer: {0}")]
    BindFailure(io::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Port from an explicit value, else `VMDSOCK` in `env`, else 5555.
pub fn resolve_port(explicit: Option<i64>, env: &HashMap<String, String>) -> Result<u16, BridgeError> {
    let check = |n: i64, shown: String| {
        u16::try_from(n).ok().filter(|&p| p != 0).ok_or(BridgeError::BadPort {
            value: shown,
            reason: "outside 1..=65535",
        })
    };
    if let Some(n) = explicit {
        return check(n, n.to_string());
    }
    match env.get(PORT_ENV) {
        None => Ok(DEFAULT_PORT),
        Some(raw) => {
            let text = raw.trim();
            if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
                return Err(BridgeError::BadPort {
                    value: raw.clone(),
                    reason: "not a decimal number",
                });
            }
            let n = text.parse::<i64>().unwrap_or(i64::MAX);
            check(n, raw.clone())
        }
    }
}

/// [`resolve_port`] against the current process environment.
pub fn resolve_port_from_env(explicit: Option<i64>) -> Result<u16, BridgeError> {
    let env: HashMap<String, String> = std::env::var(PORT_ENV)
        .ok()
        .map(|v| (PORT_ENV.to_owned(), v))
        .into_iter()
        .collect();
    resolve_port(explicit, &env)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocketConfig {
    pub host: String,
    pub port: u16,
    pub connect_timeout: Duration,
}

impl Default for SocketConfig {
    fn default() -> Self {
        Self {
            host: DEFAULT_HOST.to_owned(),
            port: DEFAULT_PORT,
            connect_timeout: DEFAULT_CONNECT_TIMEOUT,
        }
    }
}

impl SocketConfig {
    pub fn resolve(explicit: Option<i64>, env: &HashMap<String, String>) -> Result<Self, BridgeError> {
        Ok(Self {
            port: resolve_port(explicit, env)?,
            ..Self::default()
        })
    }

    pub fn local(port: u16) -> Self {
        Self {
            port,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewerCommand {
    pub verb: String,
    pub arg: String,
}

impl ViewerCommand {
    pub fn visualize(out_dir: &Path) -> Self {
        Self {
            verb: VISUALIZE_VERB.to_owned(),
            arg: out_dir.to_string_lossy().into_owned(),
        }
    }

    /// The exact bytes sent: `<verb> <arg>\n`.
    pub fn wire(&self) -> Result<Vec<u8>, BridgeError> {
        if self.verb.is_empty() || self.verb.chars().any(char::is_whitespace) {
            return Err(BridgeError::BadCommand(format!("verb {:?}", self.verb)));
        }
        if !self.arg.is_ascii() {
            return Err(BridgeError::BadCommand(format!("non-ASCII argument {:?}", self.arg)));
        }
        if self.arg.contains(['\n', '\r']) {
            return Err(BridgeError::BadCommand(format!("line break in argument {:?}", self.arg)));
        }
        Ok(format!("{} {}\n", self.verb, self.arg).into_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SendReport {
    pub bytes_sent: usize,
    pub ack: Option<String>,
}

fn first_addr(cfg: &SocketConfig) -> Result<SocketAddr, BridgeError> {
    (cfg.host.as_str(), cfg.port)
        .to_socket_addrs()?
        .next()
        .ok_or_else(|| BridgeError::Io(io::Error::new(io::ErrorKind::NotFound, format!("no address for {}", cfg.host))))
}

/// Send one command line, half-close, and collect an optional one-line ack.
pub fn send_command(cfg: &SocketConfig, command: &ViewerCommand) -> Result<SendReport, BridgeError> {
    let line = command.wire()?;
    let addr = first_addr(cfg)?;
    let mut stream = TcpStream::connect_timeout(&addr, cfg.connect_timeout).map_err(|e| match e.kind() {
        io::ErrorKind::ConnectionRefused => BridgeError::ConnectRefused(addr),
        io::ErrorKind::TimedOut | io::ErrorKind::WouldBlock => BridgeError::Timeout(format!("connecting to {addr}")),
        _ => BridgeError::Io(e),
    })?;
    stream.set_write_timeout(Some(cfg.connect_timeout))?;
    stream.write_all(&line).map_err(|e| match e.kind() {
        io::ErrorKind::TimedOut | io::ErrorKind::WouldBlock => BridgeError::Timeout(format!("writing to {addr}")),
        _ => BridgeError::Io(e),
    })?;
    stream.shutdown(Shutdown::Write)?;
    stream.set_read_timeout(Some(cfg.connect_timeout))?;
    let mut ack = Vec::new();
    let read = BufReader::new((&stream).take(MAX_ACK)).read_until(b'\n', &mut ack);
    let ack = match read {
        Ok(_) => {
            let text = String::from_utf8_lossy(&ack).trim_end_matches(['\r', '\n']).to_owned();
            (!text.is_empty()).then_some(text)
        }
        // No reply is a valid outcome.
        Err(_) => None,
    };
    Ok(SendReport {
        bytes_sent: line.len(),
        ack,
    })
}

/// Ask the viewer host to display the contents of `out_dir`.
pub fn send_visualize(cfg: &SocketConfig, out_dir: &Path) -> Result<SendReport, BridgeError> {
    if !out_dir.is_dir() {
        return Err(BridgeError::Io(io::Error::new(
            io::ErrorKind::NotFound,
            format!("{} is not a directory", out_dir.display()),
        )));
    }
    send_command(cfg, &ViewerCommand::visualize(out_dir))
}

/// Files the scriptable viewer host should load, in manifest order. Every
/// path is checked to stay inside `out_dir` and to exist.
pub fn replay_files(manifest: &ArtifactManifest, out_dir: &Path) -> Result<Vec<PathBuf>, BridgeError> {
    manifest
        .viewer
        .iter()
        .filter(|v| v.engine_hint == EngineHint::Molecular)
        .map(|v| {
            resolve_within(out_dir, &v.path).filter(|p| p.is_file()).ok_or_else(|| {
                BridgeError::Io(io::Error::new(io::ErrorKind::NotFound, format!("viewer file {}", v.path)))
            })
        })
        .collect()
}

/// Viewer URL with a cache-busting nonce.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReloadDescriptor {
    pub base_url: String,
    pub nonce: u64,
}

impl ReloadDescriptor {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            nonce: 0,
        }
    }

    #[must_use]
    pub fn next(&self) -> Self {
        Self {
            base_url: self.base_url.clone(),
            nonce: self.nonce + 1,
        }
    }

    /// `<base_url>?v=<nonce>`
    pub fn url(&self) -> String {
        format!("{}?v={}", self.base_url, self.nonce)
    }
}

impl fmt::Display for ReloadDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.url())
    }
}

pub fn next_reload(desc: &ReloadDescriptor) -> ReloadDescriptor {
    desc.next()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeerMode {
    Silent,
    /// Reply `ok\n` to every line.
    Ack,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceivedLine {
    pub at: SystemTime,
    /// Line bytes without the trailing newline.
    pub raw: Vec<u8>,
    /// Whether the line was newline-terminated.
    pub terminated: bool,
}

impl ReceivedLine {
    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.raw).into_owned()
    }
}

#[derive(Default)]
struct Log {
    lines: Mutex<Vec<ReceivedLine>>,
    grew: Condvar,
}

/// Test stand-in for the viewer's socket listener.
pub struct MockViewerPeer {
    addr: SocketAddr,
    log: Arc<Log>,
    stop: Arc<AtomicBool>,
    acceptor: Option<thread::JoinHandle<()>>,
}

impl MockViewerPeer {
    /// Listen on 127.0.0.1:`port`; port 0 picks a free one.
    pub fn bind(port: u16, mode: PeerMode) -> Result<Self, BridgeError> {
        let listener = TcpListener::bind((DEFAULT_HOST, port)).map_err(BridgeError::BindFailure)?;
        let addr = listener.local_addr().map_err(BridgeError::BindFailure)?;
        let log = Arc::new(Log::default());
        let stop = Arc::new(AtomicBool::new(false));
        let acceptor = {
            let (log, stop) = (log.clone(), stop.clone());
            thread::spawn(move || {
                for conn in listener.incoming() {
                    if stop.load(Ordering::SeqCst) {
                        break;
                    }
                    if let Ok(conn) = conn {
                        let log = log.clone();
                        thread::spawn(move || serve(conn, mode, &log));
                    }
                }
            })
        };
        Ok(Self {
            addr,
            log,
            stop,
            acceptor: Some(acceptor),
        })
    }

    pub fn port(&self) -> u16 {
        self.addr.port()
    }

    pub fn config(&self) -> SocketConfig {
        SocketConfig::local(self.port())
    }

    pub fn transcript(&self) -> Vec<ReceivedLine> {
        self.log.lines.lock().unwrap().clone()
    }

    /// Block until at least `n` lines arrived or `timeout` passed.
    pub fn wait_for(&self, n: usize, timeout: Duration) -> Vec<ReceivedLine> {
        let deadline = Instant::now() + timeout;
        let mut lines = self.log.lines.lock().unwrap();
        while lines.len() < n {
            let left = deadline.saturating_duration_since(Instant::now());
            if left.is_zero() {
                break;
            }
            lines = self.log.grew.wait_timeout(lines, left).unwrap().0;
        }
        lines.clone()
    }
}

fn serve(conn: TcpStream, mode: PeerMode, log: &Log) {
    let _ = conn.set_read_timeout(Some(Duration::from_secs(30)));
    let mut writer = match conn.try_clone() {
        Ok(w) => w,
        Err(_) => return,
    };
    let mut reader = BufReader::new(conn);
    loop {
        let mut raw = Vec::new();
        match reader.read_until(b'\n', &mut raw) {
            Ok(0) | Err(_) => return,
            Ok(_) => {}
        }
        let terminated = raw.last() == Some(&b'\n');
        if terminated {
            raw.pop();
        }
        {
            let mut lines = log.lines.lock().unwrap();
            lines.push(ReceivedLine {
                at: SystemTime::now(),
                raw,
                terminated,
            });
            log.grew.notify_all();
        }
        if mode == PeerMode::Ack && writer.write_all(b"ok\n").is_err() {
            return;
        }
    }
}

impl Drop for MockViewerPeer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the blocking accept.
        let _ = TcpStream::connect_timeout(&self.addr, Duration::from_millis(200));
        if let Some(h) = self.acceptor.take() {
            let _ = h.join();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_form_rejects_framing_breakers() {
        let ok = ViewerCommand::visualize(Path::new("/tmp/run 1/post"));
        assert_eq!(ok.wire().unwrap(), b"vmd_visualize_sbl_plugin /tmp/run 1/post\n");
        let nl = ViewerCommand::visualize(Path::new("/tmp/a\nb"));
        assert!(matches!(nl.wire(), Err(BridgeError::BadCommand(_))));
        let verb = ViewerCommand {
            verb: "two words".into(),
            arg: "x".into(),
        };
        assert!(matches!(verb.wire(), Err(BridgeError::BadCommand(_))));
    }

    #[test]
    fn reload_urls() {
        let d = ReloadDescriptor::new("/viewer/");
        assert_eq!(next_reload(&d).url(), "/viewer/?v=1");
    }
}
