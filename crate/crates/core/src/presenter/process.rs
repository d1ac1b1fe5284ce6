//! Subprocess execution with a wall-clock timeout and a bounded stderr tail.

use std::collections::VecDeque;
use std::fs::File;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use super::PresenterError;

/// Bytes of stderr kept per process.
pub const STDERR_TAIL_BYTES: usize = 64 * 1024;

const POLL_INTERVAL: Duration = Duration::from_millis(5);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecOutcome {
    /// `None` when the process was terminated by a signal.
    pub exit_code: Option<i32>,
    pub stderr_tail: String,
    pub wall_time: Duration,
}

impl ExecOutcome {
    pub fn success(&self) -> bool {
        self.exit_code == Some(0)
    }
}

/// Resolve an executable name the way a shell would: names containing a path
/// separator are taken relative to the current directory, bare names are
/// looked up on `PATH`.
pub fn resolve_program(name: &str) -> Result<PathBuf, PresenterError> {
    let path = Path::new(name);
    if path.components().count() > 1 || path.is_absolute() {
        let abs = std::path::absolute(path).map_err(|e| PresenterError::SpawnFailure(e.to_string()))?;
        return if abs.is_file() {
            Ok(abs)
        } else {
            Err(PresenterError::ExeNotFound(name.to_owned()))
        };
    }
    std::env::var_os("PATH")
        .iter()
        .flat_map(std::env::split_paths)
        .map(|dir| dir.join(name))
        .find(|p| p.is_file())
        .ok_or_else(|| PresenterError::ExeNotFound(name.to_owned()))
}

/// Interpreter prefix chosen by extension, so scripts run whether or not
/// their executable bit survived packaging.
fn invocation(program: &Path) -> Command {
    match program.extension().and_then(|e| e.to_str()) {
        Some("py") => {
            let mut c = Command::new("python3");
            c.arg(program);
            c
        }
        Some("sh") => {
            let mut c = Command::new("sh");
            c.arg(program);
            c
        }
        _ => Command::new(program),
    }
}

/// Run `program args...` in `workdir`, stdout to `stdout_path`, until exit or
/// `timeout`. A timed-out process is killed.
pub fn run(
    program: &Path,
    args: &[String],
    workdir: &Path,
    stdout_path: &Path,
    timeout: Duration,
) -> Result<ExecOutcome, PresenterError> {
    let stdout = File::create(stdout_path).map_err(|e| PresenterError::Io(format!("{}: {e}", stdout_path.display())))?;
    let started = Instant::now();
    let mut cmd = invocation(program);
    #[cfg(unix)]
    std::os::unix::process::CommandExt::process_group(&mut cmd, 0);
    let mut child = cmd
        .args(args)
        .current_dir(workdir)
        .stdin(Stdio::null())
        .stdout(stdout)
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => PresenterError::ExeNotFound(program.display().to_string()),
            _ => PresenterError::SpawnFailure(format!("{}: {e}", program.display())),
        })?;

    let mut stderr = child.stderr.take().expect("stderr is piped");
    let reader = thread::spawn(move || {
        let mut tail = VecDeque::with_capacity(STDERR_TAIL_BYTES);
        let mut buf = [0u8; 8192];
        loop {
            match stderr.read(&mut buf) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    tail.extend(&buf[..n]);
                    let excess = tail.len().saturating_sub(STDERR_TAIL_BYTES);
                    tail.drain(..excess);
                }
            }
        }
        String::from_utf8_lossy(tail.make_contiguous()).into_owned()
    });

    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) if started.elapsed() >= timeout => {
                kill_tree(&mut child);
                let _ = child.wait();
                // Grandchildren may still hold stderr; the reader ends with them.
                drop(reader);
                return Err(PresenterError::Timeout(timeout));
            }
            Ok(None) => thread::sleep(POLL_INTERVAL),
            Err(e) => return Err(PresenterError::SpawnFailure(e.to_string())),
        }
    };
    let stderr_tail = reader.join().unwrap_or_default();
    Ok(ExecOutcome {
        exit_code: status.code(),
        stderr_tail,
        wall_time: started.elapsed(),
    })
}

/// Kill the child and, on unix, its whole process group.
fn kill_tree(child: &mut std::process::Child) {
    #[cfg(unix)]
    {
        let _ = Command::new("kill")
            .args(["-s", "KILL", "--", &format!("-{}", child.id())])
            .stderr(Stdio::null())
            .status();
    }
    let _ = child.kill();
}

#[cfg(test)]
mod tests {
    use super::*;

    fn script(dir: &Path, body: &str) -> PathBuf {
        let p = dir.join("s.sh");
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn captures_exit_code_and_stderr() {
        let dir = tempfile::tempdir().unwrap();
        let p = script(dir.path(), "echo out; echo err >&2; exit 3\n");
        let out = run(&p, &[], dir.path(), &dir.path().join("o.txt"), Duration::from_secs(10)).unwrap();
        assert_eq!(out.exit_code, Some(3));
        assert_eq!(out.stderr_tail, "err\n");
        assert_eq!(std::fs::read_to_string(dir.path().join("o.txt")).unwrap(), "out\n");
    }

    #[test]
    fn stderr_tail_is_bounded() {
        let dir = tempfile::tempdir().unwrap();
        let p = script(dir.path(), "head -c 200000 /dev/zero | tr '\\0' 'x' >&2; printf END >&2\n");
        let out = run(&p, &[], dir.path(), &dir.path().join("o.txt"), Duration::from_secs(10)).unwrap();
        assert_eq!(out.stderr_tail.len(), STDERR_TAIL_BYTES);
        assert!(out.stderr_tail.ends_with("xEND"));
    }

    #[test]
    fn timeout_kills() {
        let dir = tempfile::tempdir().unwrap();
        let p = script(dir.path(), "sleep 5\n");
        let started = Instant::now();
        let err = run(&p, &[], dir.path(), &dir.path().join("o.txt"), Duration::from_millis(200)).unwrap_err();
        assert!(matches!(err, PresenterError::Timeout(_)));
        assert!(started.elapsed() < Duration::from_secs(4));
    }

    #[test]
    fn missing_program() {
        assert!(matches!(
            resolve_program("surely-not-an-installed-program.exe"),
            Err(PresenterError::ExeNotFound(_))
        ));
        assert!(matches!(resolve_program("./nope/x.exe"), Err(PresenterError::ExeNotFound(_))));
        assert!(resolve_program("sh").is_ok());
    }
}
