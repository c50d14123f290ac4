use clap::Parser;
use tokio::net::TcpListener;
use veriloop_service::{serve, App, ServeArgs};

#[derive(Debug, Parser)]
#[command(name = "veriloop-service", version, about = "Serve editing sessions over HTTP")]
struct Cli {
    #[command(flatten)]
    serve: ServeArgs,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let app = App::new(cli.serve.service_config()?)?;
    let listener = TcpListener::bind(&cli.serve.listen).await?;
    log::info!("listening on {}", listener.local_addr()?);
    serve(app, listener).await?;
    Ok(())
}
