//! The link pass: classify anchors, resolve them against the document base,
//! and route navigation back through the service's `/render` endpoint.

mod srcset;

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};

use crate::fetcher::{SourceUrl, UrlError};
use crate::html::{Document, NodeId};

pub use srcset::{parse_srcset, ImageCandidate};

/// Everything except RFC 3986 unreserved characters is escaped.
const COMPONENT: &AsciiSet = &NON_ALPHANUMERIC
    .remove(b'-')
    .remove(b'.')
    .remove(b'_')
    .remove(b'~');

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinkClass {
    Relative,
    Absolute,
    Fragment,
    /// Lowercased scheme, e.g. `mailto`.
    NonHttpScheme(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkComponent {
    pub node: NodeId,
    pub attr: &'static str,
    pub original: String,
    pub classification: LinkClass,
    /// Present for relative and absolute links that resolve to an http(s)
    /// URL; `None` for everything else, including unresolvable hrefs.
    pub resolved: Option<SourceUrl>,
}

/// An absolute URL split into origin and the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UrlParts {
    pub base: String,
    pub path_and_query: String,
}

/// Where rewritten links point, and which view settings they carry along.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderTarget {
    service_base: String,
    carry: Vec<(String, String)>,
}

impl RenderTarget {
    /// `service_base` is an absolute URL; a trailing slash is dropped.
    pub fn new(service_base: &str) -> Self {
        RenderTarget {
            service_base: service_base.trim_end_matches('/').to_string(),
            carry: Vec::new(),
        }
    }

    /// Adds a query parameter appended to every rewritten link.
    pub fn carry(mut self, name: &str, value: impl Into<String>) -> Self {
        self.carry.push((name.to_string(), value.into()));
        self
    }

    pub fn service_base(&self) -> &str {
        &self.service_base
    }

    fn render_prefix(&self) -> String {
        format!("{}/render", self.service_base)
    }

    /// True when `href` already targets this service's render endpoint.
    pub fn is_render_link(&self, href: &str) -> bool {
        let prefix = self.render_prefix();
        href.strip_prefix(&prefix)
            .is_some_and(|rest| rest.is_empty() || rest.starts_with(['?', '#']))
    }

    /// The proxied address for `target`.
    pub fn href_for(&self, target: &SourceUrl) -> String {
        let mut out = format!("{}?url={}", self.render_prefix(), encode_component(target.as_str()));
        for (k, v) in &self.carry {
            out.push('&');
            out.push_str(&encode_component(k));
            out.push('=');
            out.push_str(&encode_component(v));
        }
        out
    }
}

pub fn encode_component(s: &str) -> String {
    utf8_percent_encode(s, COMPONENT).to_string()
}

pub fn decode_component(s: &str) -> String {
    percent_decode_str(s).decode_utf8_lossy().into_owned()
}

/// Drops ASCII tab and newline anywhere and surrounding whitespace, as
/// browsers do before interpreting a URL.
fn clean(href: &str) -> String {
    href.trim_matches(|c: char| c <= ' ')
        .chars()
        .filter(|c| !matches!(c, '\t' | '\n' | '\r'))
        .collect()
}

fn scheme_of(href: &str) -> Option<&str> {
    let (scheme, _) = href.split_once(':')?;
    let mut chars = scheme.chars();
    let valid = chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    valid.then_some(scheme)
}

pub fn classify(href: &str) -> LinkClass {
    let href = clean(href);
    if href.starts_with('#') {
        return LinkClass::Fragment;
    }
    if href.starts_with("//") {
        return LinkClass::Absolute;
    }
    match scheme_of(&href).map(str::to_ascii_lowercase) {
        Some(s) if s == "http" || s == "https" => LinkClass::Absolute,
        Some(s) => LinkClass::NonHttpScheme(s),
        None => LinkClass::Relative,
    }
}

pub fn resolve(base: &SourceUrl, href: &str) -> Result<SourceUrl, UrlError> {
    base.join(&clean(href))
}

pub fn split_base(url: &SourceUrl) -> UrlParts {
    let u = url.as_url();
    let s = u.as_str();
    // Everything up to the path is the base; the url crate keeps the
    // serialization normalized, so the path always starts with '/'.
    let path_start = s[u.scheme().len() + 3..]
        .find('/')
        .map(|i| i + u.scheme().len() + 3)
        .unwrap_or(s.len());
    UrlParts {
        base: s[..path_start].to_string(),
        path_and_query: s[path_start..].to_string(),
    }
}

/// One component per `<a href>`, in document order.
pub fn extract_links(doc: &Document) -> Vec<LinkComponent> {
    doc.elements_by_tag("a")
        .into_iter()
        .filter_map(|id| {
            let href = doc.element(id)?.attr("href")?.to_string();
            let classification = classify(&href);
            let resolved = match classification {
                LinkClass::Relative | LinkClass::Absolute => resolve(doc.base_url(), &href).ok(),
                _ => None,
            };
            Some(LinkComponent {
                node: id,
                attr: "href",
                original: href,
                classification,
                resolved,
            })
        })
        .collect()
}

/// The new href for `link`.
pub fn rewrite_link(link: &LinkComponent, target: &RenderTarget) -> String {
    match &link.classification {
        LinkClass::Fragment => link.original.clone(),
        LinkClass::NonHttpScheme(s) if s == "mailto" || s == "tel" => link.original.clone(),
        LinkClass::NonHttpScheme(_) => "#".to_string(),
        LinkClass::Relative | LinkClass::Absolute => {
            if target.is_render_link(&clean(&link.original)) {
                return link.original.clone();
            }
            match &link.resolved {
                Some(url) if target.is_render_link(url.as_str()) => url.to_string(),
                Some(url) => target.href_for(url),
                None => "#".to_string(),
            }
        }
    }
}

/// Rewrites every anchor and returns how many hrefs changed.
pub fn rewrite_links(doc: &mut Document, target: &RenderTarget) -> usize {
    let mut changed = 0;
    for link in extract_links(doc) {
        let href = rewrite_link(&link, target);
        if href != link.original {
            if let Some(el) = doc.element_mut(link.node) {
                el.set_attr(link.attr, href);
            }
            changed += 1;
        }
    }
    changed
}

/// Applies the first `<base href>` to the document base URL and removes all
/// `<base>` elements, so that the links left in the output are
/// self-contained.
pub fn apply_base_element(doc: &mut Document) {
    let bases = doc.elements_by_tag("base");
    let href = bases
        .iter()
        .find_map(|&id| doc.element(id).and_then(|e| e.attr("href")).map(str::to_string));
    if let Some(href) = href {
        if let Ok(url) = resolve(doc.base_url(), &href) {
            doc.set_base_url(url);
        }
    }
    for id in bases {
        doc.detach(id);
    }
}

fn absolutize(base: &SourceUrl, src: &str) -> Option<String> {
    let cleaned = clean(src);
    let needs = match classify(&cleaned) {
        LinkClass::Relative => true,
        LinkClass::Absolute => cleaned.starts_with("//"),
        _ => false,
    };
    if !needs {
        return None;
    }
    resolve(base, &cleaned).ok().map(|u| u.to_string())
}

/// Makes image and media sources absolute against the document base so
/// they still load from their origin.
pub fn rewrite_resources(doc: &mut Document) {
    let base = doc.base_url().clone();
    let mut edits: Vec<(NodeId, &'static str, String)> = Vec::new();
    for id in doc.descendants() {
        let Some(el) = doc.element(id) else {
            continue;
        };
        let attrs: &[&'static str] = match el.tag.as_str() {
            "img" | "source" => &["src", "srcset"],
            "video" => &["poster"],
            _ => continue,
        };
        for &name in attrs {
            let Some(value) = el.attr(name) else {
                continue;
            };
            let new = if name == "srcset" {
                let candidates = parse_srcset(value);
                let rewritten: Vec<String> = candidates
                    .iter()
                    .map(|c| {
                        let url = absolutize(&base, &c.url).unwrap_or_else(|| c.url.clone());
                        match &c.descriptor {
                            Some(d) => format!("{url} {d}"),
                            None => url,
                        }
                    })
                    .collect();
                let joined = rewritten.join(", ");
                (candidates.iter().any(|c| absolutize(&base, &c.url).is_some()))
                    .then_some(joined)
            } else {
                absolutize(&base, value)
            };
            if let Some(new) = new {
                edits.push((id, name, new));
            }
        }
    }
    for (id, name, value) in edits {
        if let Some(el) = doc.element_mut(id) {
            el.set_attr(name, value);
        }
    }
}
