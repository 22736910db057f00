//! Re-skins web pages for readers with low vision.
//!
//! A page is fetched ([`fetcher`]), parsed ([`html`]), stripped of author
//! styling and scripts in favour of one high-contrast Clear Print sheet
//! ([`style`]), and has its links routed back through the service
//! ([`links`]). [`pipeline`] ties those together, [`service`] serves the
//! result over HTTP and [`eval`] measures load time and text preservation.
//!
//! ```
//! use clearlens::fetcher::{FetchOptions, SourceUrl};
//! use clearlens::html::{parse_str, serialize};
//! use clearlens::pipeline::{transform_document, TransformConfig};
//! use clearlens::style::PresetCatalog;
//!
//! let mut doc = parse_str(
//!     r#"<p style="color:#aaa">Hi <a href="/next">next</a><script>x()</script>"#,
//!     SourceUrl::parse("http://example.com/").unwrap(),
//! );
//! let cfg = TransformConfig::new(
//!     PresetCatalog::builtin().get("default").unwrap().clone(),
//!     "http://localhost:8080",
//!     FetchOptions::default(),
//! )
//! .unwrap();
//! transform_document(&mut doc, &cfg);
//! let html = serialize(&doc);
//! assert!(!html.contains("<script"));
//! assert!(html.contains(r#"href="http://localhost:8080/render?url=http%3A%2F%2Fexample.com%2Fnext""#));
//! ```

pub mod cli;
pub mod eval;
pub mod fetcher;
pub mod fixtures;
pub mod html;
pub mod links;
pub mod pipeline;
pub mod service;
pub mod style;
