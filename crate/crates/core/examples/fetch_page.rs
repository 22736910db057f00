//! Fetch a page with redirects, limits and charset detection.
//!
//! cargo run --example fetch_page -- https://example.com/
//! Without an argument it fetches a redirecting page from a local fixture origin.

use clearlens::fetcher::{FetchOptions, Fetcher, SourceUrl};
use clearlens::fixtures::FixtureOrigin;

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let origin;
    let url = match std::env::args().nth(1) {
        Some(u) => SourceUrl::parse(&u)?,
        None => {
            origin = FixtureOrigin::start().await?;
            origin.url("/redirect/3")
        }
    };
    let fetcher = Fetcher::new(FetchOptions { timeout_ms: 5_000, ..FetchOptions::default() })?;
    match fetcher.fetch(&url).await {
        Ok(page) => println!(
            "{} -> {} ({} {}, {} bytes as {}, {:?})",
            page.requested_url, page.final_url, page.status, page.content_type, page.body.len(), page.charset, page.fetch_duration
        ),
        Err(e) => println!("{url}: {e}"),
    }
    Ok(())
}
