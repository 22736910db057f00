//! Transform a saved HTML file the way the service would.
//!
//! cargo run --example transform_file -- page.html [preset]

use anyhow::Context;
use clearlens::cli::FILE_BASE;
use clearlens::fetcher::{resolve_charset, FetchOptions, SourceUrl};
use clearlens::html::{parse_html, serialize};
use clearlens::pipeline::{transform_document, TransformConfig};
use clearlens::style::PresetCatalog;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/page.html").into());
    let preset = args.next().unwrap_or_else(|| "default".into());
    let body = std::fs::read(&path).with_context(|| format!("reading {path}"))?;
    let mut doc = parse_html(&body, resolve_charset(None, &body), SourceUrl::parse(FILE_BASE)?)?;
    let cfg = TransformConfig::new(
        PresetCatalog::builtin().get(&preset)?.clone(),
        "http://localhost:8080",
        FetchOptions::default(),
    )?;
    let stats = transform_document(&mut doc, &cfg);
    eprintln!("{stats}");
    println!("{}", serialize(&doc));
    Ok(())
}
