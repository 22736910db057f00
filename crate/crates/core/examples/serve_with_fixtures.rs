//! Run the service next to a fixture origin and print a few links to try.
//!
//! cargo run --example serve_with_fixtures

use clearlens::fixtures::FixtureOrigin;
use clearlens::links::encode_component;
use clearlens::service::{serve_on, AppState, ServiceConfig};

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt().with_env_filter("info").init();
    let origin = FixtureOrigin::start().await?;
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let base = format!("http://{}", listener.local_addr()?);
    let config = ServiceConfig { public_base: base.clone(), ..ServiceConfig::default() };
    for path in ["/pages/page-1.html", "/pages/page-7.html", "/stall"] {
        println!("{base}/render?url={}", encode_component(origin.url(path).as_str()));
    }
    println!("{base}/api/report?url={}", encode_component(origin.page_url("page-2").as_str()));
    serve_on(listener, AppState::new(config)?, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await?;
    Ok(())
}
