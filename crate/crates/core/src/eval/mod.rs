//! Text preservation and load time measurements over URL batches.

mod report;

use std::collections::HashMap;
use std::time::Duration;

use futures::stream::{self, StreamExt};
use serde::Serialize;

use crate::fetcher::{Fetcher, SourceUrl};
use crate::html::{parse_html, text_content, Document};
use crate::links::{apply_base_element, classify, resolve, LinkClass};
use crate::pipeline::{transform_fetched, PipelineError, TransformConfig, TransformStats};

pub use report::{
    display_percent, read_report, write_csv, write_plot_data, ReportError, NLT_MODEL,
};

/// Percentage of the original tokens (as a multiset) still present in the
/// transformed document. 100 when the original has no tokens.
pub fn conversion_rate(original: &Document, transformed: &Document) -> f64 {
    conversion_rate_tokens(&text_content(original), &text_content(transformed))
}

pub fn conversion_rate_tokens(original: &[String], transformed: &[String]) -> f64 {
    if original.is_empty() {
        return 100.0;
    }
    let mut available: HashMap<&str, usize> = HashMap::new();
    for t in transformed {
        *available.entry(t).or_default() += 1;
    }
    let mut common = 0usize;
    for t in original {
        if let Some(n) = available.get_mut(t.as_str()) {
            if *n > 0 {
                *n -= 1;
                common += 1;
            }
        }
    }
    100.0 * common as f64 / original.len() as f64
}

/// One URL's measurements.
#[derive(Debug, Clone, Serialize)]
pub struct UrlMeasurement {
    pub url: String,
    pub nlt_ms: f64,
    pub wlt_ms: f64,
    pub conversion_rate: f64,
    pub subresources: usize,
    pub stats: TransformStats,
}

/// Stylesheets and scripts a browser would fetch for `doc`.
pub fn subresource_urls(doc: &Document) -> Vec<SourceUrl> {
    let mut doc = doc.clone();
    apply_base_element(&mut doc);
    let mut out = Vec::new();
    for id in doc.descendants() {
        let Some(el) = doc.element(id) else {
            continue;
        };
        let href = match el.tag.as_str() {
            "link"
                if el.attr("rel").is_some_and(|r| {
                    r.split_ascii_whitespace()
                        .any(|t| t.eq_ignore_ascii_case("stylesheet"))
                }) =>
            {
                el.attr("href")
            }
            "script" => el.attr("src"),
            _ => None,
        };
        let Some(href) = href else {
            continue;
        };
        if matches!(classify(href), LinkClass::Relative | LinkClass::Absolute) {
            if let Ok(url) = resolve(doc.base_url(), href) {
                out.push(url);
            }
        }
    }
    out
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

/// Measures one URL with a single page fetch.
///
/// Normal load time is the page fetch plus a serial fetch of every linked
/// stylesheet and script. Transformed load time is the page fetch plus the
/// transform, since the output references none of them.
pub async fn measure_load(
    fetcher: &Fetcher,
    url: &SourceUrl,
    cfg: &TransformConfig,
) -> Result<UrlMeasurement, PipelineError> {
    let page = fetcher.fetch(url).await?;
    let original = parse_html(&page.body, &page.charset, page.final_url.clone())?;
    let subresources = subresource_urls(&original);
    let mut sub_total = Duration::ZERO;
    for sub in &subresources {
        match fetcher.fetch_discard(sub).await {
            Ok(d) => sub_total += d,
            Err(e) => tracing::warn!(url = %sub, error = %e, "subresource fetch failed"),
        }
    }
    let out = transform_fetched(&page, cfg)?;
    let transformed = parse_html(out.html.as_bytes(), "utf-8", out.source_url.clone())?;
    Ok(UrlMeasurement {
        url: url.to_string(),
        nlt_ms: ms(page.fetch_duration + sub_total),
        wlt_ms: ms(page.fetch_duration + out.transform_duration),
        conversion_rate: conversion_rate(&original, &transformed),
        subresources: subresources.len(),
        stats: out.stats,
    })
}

/// A `label,url` line from a batch manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledUrl {
    pub label: String,
    pub url: String,
}

impl LabeledUrl {
    pub fn new(label: impl Into<String>, url: impl Into<String>) -> Self {
        LabeledUrl {
            label: label.into(),
            url: url.into(),
        }
    }
}

/// Parses a manifest of `label,url` lines. Blank lines and `#` comments are
/// skipped.
pub fn parse_manifest(text: &str) -> Result<Vec<LabeledUrl>, ReportError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (label, url) = line.split_once(',').ok_or_else(|| ReportError::InvalidRow {
            line: i + 1,
            reason: "expected label,url".into(),
        })?;
        out.push(LabeledUrl::new(label.trim(), url.trim()));
    }
    Ok(out)
}

/// One row of the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConversionReport {
    pub batch_label: String,
    pub url: String,
    pub nlt_ms: f64,
    pub wlt_ms: f64,
    pub conversion_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UrlFailure {
    pub label: String,
    pub url: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    pub rows: Vec<ConversionReport>,
    pub failures: Vec<UrlFailure>,
    pub mean_conversion_rate: f64,
    pub mean_nlt_ms: f64,
    pub mean_wlt_ms: f64,
}

/// Arithmetic means over `rows`; all zero when there are none.
pub fn summarize(rows: Vec<ConversionReport>, failures: Vec<UrlFailure>) -> BatchSummary {
    let mean = |f: fn(&ConversionReport) -> f64| {
        if rows.is_empty() {
            0.0
        } else {
            rows.iter().map(f).sum::<f64>() / rows.len() as f64
        }
    };
    BatchSummary {
        mean_conversion_rate: mean(|r| r.conversion_rate),
        mean_nlt_ms: mean(|r| r.nlt_ms),
        mean_wlt_ms: mean(|r| r.wlt_ms),
        rows,
        failures,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("the URL list is empty")]
    EmptyBatch,
    #[error("all {} URLs failed", failures.len())]
    AllUrlsFailed { failures: Vec<UrlFailure> },
}

/// Measures every URL, at most `parallelism` at a time. Rows keep input
/// order; failed URLs are logged and listed in the summary.
pub async fn batch_evaluate(
    fetcher: &Fetcher,
    urls: &[LabeledUrl],
    cfg: &TransformConfig,
    parallelism: usize,
) -> Result<BatchSummary, EvalError> {
    if urls.is_empty() {
        return Err(EvalError::EmptyBatch);
    }
    let results: Vec<_> = stream::iter(urls)
        .map(|item| async move {
            let result = match SourceUrl::parse(&item.url) {
                Ok(url) => measure_load(fetcher, &url, cfg).await,
                Err(e) => Err(PipelineError::Fetch(e.into())),
            };
            (item, result)
        })
        .buffered(parallelism.max(1))
        .collect()
        .await;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (item, result) in results {
        match result {
            Ok(m) => rows.push(ConversionReport {
                batch_label: item.label.clone(),
                url: item.url.clone(),
                nlt_ms: m.nlt_ms,
                wlt_ms: m.wlt_ms,
                conversion_rate: m.conversion_rate,
            }),
            Err(e) => {
                tracing::warn!(label = %item.label, url = %item.url, error = %e, "excluded from batch");
                failures.push(UrlFailure {
                    label: item.label.clone(),
                    url: item.url.clone(),
                    error: e.to_string(),
                });
            }
        }
    }
    if rows.is_empty() {
        return Err(EvalError::AllUrlsFailed { failures });
    }
    Ok(summarize(rows, failures))
}
