use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;

use clap::Parser;

/// Serves elections over HTTP.
#[derive(Parser, Debug)]
#[command(name = "dembudget-server", version)]
struct Args {
    #[arg(long, env = "DEMBUDGET_BIND", default_value = "127.0.0.1")]
    bind: IpAddr,
    #[arg(long, short, env = "DEMBUDGET_PORT", default_value_t = 8080)]
    port: u16,
    /// Directory holding one `<id>.jsonl` log per election.
    #[arg(long, env = "DEMBUDGET_DATA_DIR", default_value = "data")]
    data_dir: PathBuf,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    tracing_subscriber::fmt::init();
    let args = Args::parse();
    let app = dembudget_service::app(&args.data_dir)?;
    let addr = SocketAddr::new(args.bind, args.port);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {addr}");
    axum::serve(listener, app).await
}
