//! Serve the synthetic test pages until interrupted.
//!
//! cargo run --example fixture_origin

use clearlens::fixtures::{corpus, FixtureOrigin};

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let origin = FixtureOrigin::start().await?;
    for p in corpus() {
        println!("{}  {} stylesheets, {} scripts", origin.page_url(&p.slug), p.stylesheets, p.scripts);
    }
    println!("also: /redirect/3 /redirect-loop /stall /huge /image.png /latin1.html /status/500");
    tokio::signal::ctrl_c().await?;
    println!("served {} requests", origin.requests());
    Ok(())
}
