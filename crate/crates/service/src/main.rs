use std::path::PathBuf;
use std::time::Duration;

use clap::Parser;
use hitailor_service::{serve, AppState, ServiceConfig, DEFAULT_MAX_TABLE_CELLS};

/// Serve the hierarchical table API.
#[derive(Debug, Parser)]
#[command(name = "hitailor-server", version)]
struct Args {
    #[arg(long, env = "HITAILOR_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Directory for periodic session snapshots; sessions found there are restored at startup.
    #[arg(long, env = "HITAILOR_SNAPSHOT_DIR")]
    snapshot_dir: Option<PathBuf>,
    /// Seconds between snapshots.
    #[arg(long, default_value_t = 30)]
    snapshot_interval: u64,
    #[arg(long, env = "HITAILOR_MAX_TABLE_CELLS", default_value_t = DEFAULT_MAX_TABLE_CELLS)]
    max_table_cells: usize,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();
    let args = Args::parse();
    let state = AppState::new(ServiceConfig {
        max_table_cells: args.max_table_cells,
        snapshot_dir: args.snapshot_dir,
        snapshot_interval: Duration::from_secs(args.snapshot_interval.max(1)),
    });
    let restored = state.restore()?;
    if restored > 0 {
        tracing::info!("restored {restored} sessions");
    }
    state.spawn_snapshots();
    let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port)).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    serve(listener, state.clone(), async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await?;
    state.persist()?;
    Ok(())
}
