//! Fetch, parse, style pass, link pass, serialize.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::fetcher::{FetchError, FetchOptions, FetchedPage, Fetcher, SourceUrl};
use crate::html::{parse_html, serialize, Document, ElementData, HtmlError};
use crate::links::{apply_base_element, rewrite_links, rewrite_resources, RenderTarget};
use crate::style::{apply_clearprint, clamp_scale, ClearPrintPreset, PresetCatalog, PresetError};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Fetch(#[from] FetchError),
    #[error(transparent)]
    Html(#[from] HtmlError),
    #[error(transparent)]
    Preset(#[from] PresetError),
    #[error("invalid service base {0:?}: expected an absolute http(s) URL")]
    InvalidServiceBase(String),
}

/// Display choices made by the reader, from a query string or the command
/// line. `None` means the configured default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ViewSettings {
    pub preset: Option<String>,
    pub scale: Option<f64>,
}

/// Everything a transform depends on.
#[derive(Debug, Clone)]
pub struct TransformConfig {
    pub preset: ClearPrintPreset,
    pub target: RenderTarget,
    pub fetch: FetchOptions,
}

impl TransformConfig {
    pub fn new(
        preset: ClearPrintPreset,
        service_base: &str,
        fetch: FetchOptions,
    ) -> Result<Self, PipelineError> {
        Ok(TransformConfig {
            preset,
            target: RenderTarget::new(&validate_service_base(service_base)?),
            fetch,
        })
    }

    /// Resolves `view` against the catalog. The scale is clamped and
    /// multiplies the preset font size; settings given explicitly are carried
    /// into rewritten links so they survive navigation.
    pub fn for_view(
        catalog: &PresetCatalog,
        default_preset: &str,
        view: &ViewSettings,
        service_base: &str,
        fetch: FetchOptions,
    ) -> Result<Self, PipelineError> {
        let name = view.preset.as_deref().unwrap_or(default_preset);
        let mut preset = catalog.get(name)?.clone();
        let mut target = RenderTarget::new(&validate_service_base(service_base)?);
        if let Some(p) = &view.preset {
            target = target.carry("preset", p.as_str());
        }
        if let Some(scale) = view.scale {
            let scale = clamp_scale(scale);
            preset = preset.scaled(scale);
            target = target.carry("scale", scale.to_string());
        }
        Ok(TransformConfig {
            preset,
            target,
            fetch,
        })
    }

    pub fn service_base(&self) -> &str {
        self.target.service_base()
    }
}

/// Checks that `base` is an absolute http(s) URL and strips trailing
/// slashes.
pub fn validate_service_base(base: &str) -> Result<String, PipelineError> {
    let trimmed = base.trim().trim_end_matches('/');
    let lower = trimmed.to_ascii_lowercase();
    let ok = (lower.starts_with("http://") || lower.starts_with("https://"))
        && SourceUrl::parse(trimmed).is_ok()
        && !trimmed.contains(['?', '#']);
    if ok {
        Ok(trimmed.to_string())
    } else {
        Err(PipelineError::InvalidServiceBase(base.to_string()))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TransformStats {
    pub styles_removed: usize,
    pub scripts_removed: usize,
    pub links_rewritten: usize,
}

impl std::fmt::Display for TransformStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "styles_removed={} scripts_removed={} links_rewritten={}",
            self.styles_removed, self.scripts_removed, self.links_rewritten
        )
    }
}

#[derive(Debug, Clone)]
pub struct AccessiblePage {
    pub source_url: SourceUrl,
    pub html: String,
    pub transform_duration: Duration,
    pub stats: TransformStats,
}

/// Runs both passes over a parsed document, in place.
///
/// The style pass runs before the link pass. The document ends up with a
/// single `<meta charset="utf-8">` as the first child of `head`, since the
/// output is always UTF-8.
pub fn transform_document(doc: &mut Document, cfg: &TransformConfig) -> TransformStats {
    apply_base_element(doc);
    let style = apply_clearprint(doc, &cfg.preset);
    let links_rewritten = rewrite_links(doc, &cfg.target);
    rewrite_resources(doc);
    declare_utf8(doc);
    TransformStats {
        styles_removed: style.styles_removed,
        scripts_removed: style.scripts_removed,
        links_rewritten,
    }
}

pub(crate) fn declare_utf8(doc: &mut Document) {
    for id in doc.elements_by_tag("meta") {
        let declares = doc.element(id).is_some_and(|e| {
            e.has_attr("charset")
                || e.attr("http-equiv")
                    .is_some_and(|v| v.eq_ignore_ascii_case("content-type"))
        });
        if declares {
            doc.detach(id);
        }
    }
    let mut meta = ElementData::new("meta");
    meta.set_attr("charset", "utf-8");
    let meta = doc.create_element(meta);
    let head = doc.head();
    doc.prepend(head, meta);
}

/// Transforms an already fetched page.
pub fn transform_fetched(
    page: &FetchedPage,
    cfg: &TransformConfig,
) -> Result<AccessiblePage, PipelineError> {
    let start = Instant::now();
    let mut doc = parse_html(&page.body, &page.charset, page.final_url.clone())?;
    let stats = transform_document(&mut doc, cfg);
    let html = serialize(&doc);
    Ok(AccessiblePage {
        source_url: page.final_url.clone(),
        html,
        transform_duration: start.elapsed(),
        stats,
    })
}

/// Fetches `url` and transforms it. Links resolve against the URL reached
/// after redirects.
pub async fn transform_url(
    fetcher: &Fetcher,
    url: &SourceUrl,
    cfg: &TransformConfig,
) -> Result<AccessiblePage, PipelineError> {
    let page = fetcher.fetch(url).await?;
    transform_fetched(&page, cfg)
}
