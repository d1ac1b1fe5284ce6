use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use anyhow::Context;
use clap::Parser;
use guigen_core::presenter::RunConfig;
use guigen_host::HostConfig;

/// Serve a generated web plugin over HTTP.
#[derive(Debug, Parser)]
#[command(name = "plugin-host", version)]
struct Args {
    /// Generated panel-* tree holding host-config.json and the spec copy.
    #[arg(long)]
    plugin_dir: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    listen: SocketAddr,
    /// Root for per-session run directories.
    #[arg(long, default_value = "sessions")]
    sessions: PathBuf,
    /// Built frontend (index.html plus assets/); the built-in page otherwise.
    #[arg(long)]
    frontend: Option<PathBuf>,
    /// Executable to run instead of the one named in the spec.
    #[arg(long)]
    exe: Option<PathBuf>,
    /// Post-analysis script instead of the one named in the spec.
    #[arg(long)]
    post_script: Option<PathBuf>,
    /// Per-process timeout in seconds.
    #[arg(long, default_value_t = 600)]
    timeout: u64,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let args = Args::parse();
    let timeout = Duration::from_secs(args.timeout);
    let run = RunConfig {
        exe: args.exe,
        post_script: args.post_script,
        timeout,
        post_timeout: timeout,
    };
    let (mut cfg, spec) = HostConfig::load(&args.plugin_dir, &args.sessions, run)
        .with_context(|| format!("loading plugin from {}", args.plugin_dir.display()))?;
    cfg.listen = args.listen;
    cfg.frontend_dir = args.frontend;
    eprintln!(
        "serving {} ({} viewer) on http://{}",
        spec.spec.meta.app_name,
        cfg.engine_hint.as_str(),
        cfg.listen
    );
    guigen_host::serve(cfg, spec).await.context("server stopped")
}
