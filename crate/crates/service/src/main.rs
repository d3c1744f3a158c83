use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use quipline_service::{start, ServiceConfig, CONFIG_ENV};
use tracing_subscriber::EnvFilter;

/// Serve the game API over HTTP.
#[derive(Debug, Parser)]
#[command(name = "quipline-server", version)]
struct Args {
    /// TOML config file.
    #[arg(long, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Event log path, overriding the config.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Listen port, overriding the config. 0 picks a free port.
    #[arg(long)]
    port: Option<u16>,
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();

    let args = Args::parse();
    let mut config = match &args.config {
        Some(path) => match ServiceConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
        },
        None => ServiceConfig::default(),
    };
    if let Some(log) = args.log {
        config.log_path = log;
    }
    if let Some(port) = args.port {
        config.port = port;
    }

    let server = match start(config).await {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    // Scripts wait for this line to learn the bound port.
    println!("listening on {}", server.addr);
    let _ = std::io::stdout().flush();

    shutdown_signal().await;
    tracing::info!("shutting down");
    match server.shutdown().await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

async fn shutdown_signal() {
    #[cfg(unix)]
    {
        use tokio::signal::unix::{signal, SignalKind};
        let mut term = signal(SignalKind::terminate()).expect("install SIGTERM handler");
        tokio::select! {
            _ = tokio::signal::ctrl_c() => {}
            _ = term.recv() => {}
        }
    }
    #[cfg(not(unix))]
    let _ = tokio::signal::ctrl_c().await;
}
