use std::path::PathBuf;

use clap::Parser;
use coview_core::session::{SessionConfig, DEFAULT_ROOM_CAPACITY};
use coview_server::{serve, ServerConfig};
use tokio::net::TcpListener;
use tracing_subscriber::EnvFilter;

/// Relay server for shared mesh viewing sessions.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    #[arg(long, default_value = "0.0.0.0:9464")]
    listen: String,
    #[arg(long, default_value_t = DEFAULT_ROOM_CAPACITY)]
    room_capacity: usize,
    /// Tracing filter, e.g. `info` or `coview_server=debug`.
    #[arg(long, default_value = "info")]
    log_level: String,
    /// Directory for saved room snapshots. Without it saves live in memory only.
    #[arg(long)]
    persist_dir: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let args = Args::parse();
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_new(&args.log_level).unwrap_or_else(|_| EnvFilter::new("info")))
        .init();
    if args.room_capacity == 0 {
        eprintln!("--room-capacity must be at least 1");
        std::process::exit(2);
    }
    let config = ServerConfig {
        session: SessionConfig {
            room_capacity: args.room_capacity,
            ..SessionConfig::default()
        },
        persist_dir: args.persist_dir,
        ..ServerConfig::default()
    };
    let listener = TcpListener::bind(&args.listen).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    tokio::select! {
        r = serve(listener, config) => r,
        _ = tokio::signal::ctrl_c() => {
            tracing::info!("shutting down");
            Ok(())
        }
    }
}
