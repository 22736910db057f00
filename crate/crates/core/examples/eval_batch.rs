//! Measure load times and conversion rates for the fixture corpus and
//! write a CSV report.

use clearlens::eval::{batch_evaluate, write_csv};
use clearlens::fetcher::{FetchOptions, Fetcher};
use clearlens::fixtures::FixtureOrigin;
use clearlens::pipeline::TransformConfig;
use clearlens::style::PresetCatalog;

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let origin = FixtureOrigin::start().await?;
    let mut manifest = origin.manifest();
    manifest.push(clearlens::eval::LabeledUrl::new("B11", origin.url("/status/500").to_string()));
    let cfg = TransformConfig::new(
        PresetCatalog::builtin().get("default")?.clone(),
        "http://localhost:8080",
        FetchOptions::default(),
    )?;
    let summary = batch_evaluate(&Fetcher::new(FetchOptions::default())?, &manifest, &cfg, 4).await?;
    write_csv(&summary, std::io::stdout().lock())?;
    Ok(())
}
