//! Page retrieval: manual redirect following, size and time limits, and
//! charset resolution.

mod url;

use std::sync::LazyLock;
use std::time::{Duration, Instant};

use regex::bytes::Regex;
use reqwest::header::{CONTENT_LENGTH, CONTENT_TYPE, LOCATION};
use serde::{Deserialize, Serialize};

pub use self::url::{parse_url, Scheme, SourceUrl, UrlError};

/// Limits applied to every fetch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FetchOptions {
    pub timeout_ms: u64,
    pub max_redirects: u32,
    pub max_body_bytes: u64,
    pub user_agent: String,
}

impl Default for FetchOptions {
    fn default() -> Self {
        FetchOptions {
            timeout_ms: 15_000,
            max_redirects: 10,
            max_body_bytes: 8 * 1024 * 1024,
            user_agent: "clearlens/1.0".to_string(),
        }
    }
}

impl FetchOptions {
    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }

    pub fn validate(&self) -> Result<(), FetchError> {
        let problem = if self.timeout_ms == 0 {
            "timeout_ms must be positive"
        } else if self.max_body_bytes == 0 {
            "max_body_bytes must be positive"
        } else if self.user_agent.trim().is_empty() {
            "user_agent must not be empty"
        } else {
            return Ok(());
        };
        Err(FetchError::InvalidOptions(problem.to_string()))
    }
}

/// A successfully fetched HTML document.
#[derive(Debug, Clone)]
pub struct FetchedPage {
    pub requested_url: SourceUrl,
    pub final_url: SourceUrl,
    pub status: u16,
    pub content_type: String,
    /// Canonical encoding name, always accepted by [`crate::html::parse_html`].
    pub charset: String,
    pub body: Vec<u8>,
    pub fetch_duration: Duration,
}

#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error(transparent)]
    Url(#[from] UrlError),
    #[error("invalid fetch options: {0}")]
    InvalidOptions(String),
    #[error("timed out after {after_ms} ms fetching {url}")]
    Timeout { url: String, after_ms: u64 },
    #[error("more than {max} redirects starting at {url}")]
    TooManyRedirects { url: String, max: u32 },
    #[error("redirect from {from} to unusable location {location:?}")]
    BadRedirect { from: String, location: String },
    #[error("{url} answered with HTTP status {status}")]
    HttpError { url: String, status: u16 },
    #[error("{url} is not an HTML page (content type {content_type:?})")]
    NotHtml { url: String, content_type: String },
    #[error("{url} is larger than the {limit} byte limit")]
    BodyTooLarge { url: String, limit: u64 },
    #[error("request to {url} failed: {message}")]
    Network { url: String, message: String },
}

/// HTTP client shared across fetches. Cheap to clone; no cookies are kept.
#[derive(Debug, Clone)]
pub struct Fetcher {
    client: reqwest::Client,
    opts: FetchOptions,
}

impl Fetcher {
    pub fn new(opts: FetchOptions) -> Result<Self, FetchError> {
        opts.validate()?;
        let client = reqwest::Client::builder()
            .redirect(reqwest::redirect::Policy::none())
            .user_agent(opts.user_agent.clone())
            .build()
            .map_err(|e| FetchError::InvalidOptions(e.to_string()))?;
        Ok(Fetcher { client, opts })
    }

    pub fn options(&self) -> &FetchOptions {
        &self.opts
    }

    /// Fetches `url`, following redirects. The whole operation, body
    /// included, is bounded by the configured timeout.
    pub async fn fetch(&self, url: &SourceUrl) -> Result<FetchedPage, FetchError> {
        let start = Instant::now();
        match tokio::time::timeout(self.opts.timeout(), self.fetch_inner(url)).await {
            Ok(Ok(mut page)) => {
                page.fetch_duration = start.elapsed();
                Ok(page)
            }
            Ok(Err(e)) => Err(e),
            Err(_) => Err(FetchError::Timeout {
                url: url.to_string(),
                after_ms: self.opts.timeout_ms,
            }),
        }
    }

    /// Fetches a subresource and discards it, returning the elapsed time.
    /// Any status and content type is accepted.
    pub async fn fetch_discard(&self, url: &SourceUrl) -> Result<Duration, FetchError> {
        let start = Instant::now();
        let work = async {
            let mut resp = self.send(url).await?;
            while resp
                .chunk()
                .await
                .map_err(|e| network(url, &e))?
                .is_some()
            {}
            Ok::<_, FetchError>(())
        };
        match tokio::time::timeout(self.opts.timeout(), work).await {
            Ok(r) => r.map(|()| start.elapsed()),
            Err(_) => Err(FetchError::Timeout {
                url: url.to_string(),
                after_ms: self.opts.timeout_ms,
            }),
        }
    }

    async fn send(&self, url: &SourceUrl) -> Result<reqwest::Response, FetchError> {
        self.client
            .get(url.as_str())
            .send()
            .await
            .map_err(|e| network(url, &e))
    }

    async fn fetch_inner(&self, requested: &SourceUrl) -> Result<FetchedPage, FetchError> {
        let mut current = requested.clone();
        let mut redirects = 0;
        let mut resp = loop {
            let resp = self.send(&current).await?;
            if !resp.status().is_redirection() {
                break resp;
            }
            let Some(location) = resp.headers().get(LOCATION) else {
                break resp;
            };
            if redirects == self.opts.max_redirects {
                return Err(FetchError::TooManyRedirects {
                    url: requested.to_string(),
                    max: self.opts.max_redirects,
                });
            }
            redirects += 1;
            let location = String::from_utf8_lossy(location.as_bytes()).into_owned();
            current = current.join(&location).map_err(|_| FetchError::BadRedirect {
                from: current.to_string(),
                location,
            })?;
        };

        let status = resp.status().as_u16();
        if !resp.status().is_success() {
            return Err(FetchError::HttpError {
                url: current.to_string(),
                status,
            });
        }
        let content_type = resp
            .headers()
            .get(CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
            .unwrap_or_default()
            .to_string();
        if !is_html_type(&content_type) {
            return Err(FetchError::NotHtml {
                url: current.to_string(),
                content_type,
            });
        }
        let too_large = || FetchError::BodyTooLarge {
            url: current.to_string(),
            limit: self.opts.max_body_bytes,
        };
        let declared = resp
            .headers()
            .get(CONTENT_LENGTH)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.parse::<u64>().ok());
        if declared.is_some_and(|n| n > self.opts.max_body_bytes) {
            return Err(too_large());
        }
        let mut body = Vec::with_capacity(declared.unwrap_or(0) as usize);
        while let Some(chunk) = resp.chunk().await.map_err(|e| network(&current, &e))? {
            if (body.len() + chunk.len()) as u64 > self.opts.max_body_bytes {
                return Err(too_large());
            }
            body.extend_from_slice(&chunk);
        }
        let charset = resolve_charset(Some(&content_type), &body).to_string();
        Ok(FetchedPage {
            requested_url: requested.clone(),
            final_url: current,
            status,
            content_type,
            charset,
            body,
            fetch_duration: Duration::ZERO,
        })
    }
}

fn network(url: &SourceUrl, err: &reqwest::Error) -> FetchError {
    use std::error::Error;
    let mut message = err.to_string();
    let mut source = err.source();
    while let Some(s) = source {
        message.push_str(": ");
        message.push_str(&s.to_string());
        source = s.source();
    }
    FetchError::Network {
        url: url.to_string(),
        message,
    }
}

/// The media type without parameters, lowercased.
fn essence(content_type: &str) -> String {
    content_type
        .split(';')
        .next()
        .unwrap_or_default()
        .trim()
        .to_ascii_lowercase()
}

pub fn is_html_type(content_type: &str) -> bool {
    matches!(
        essence(content_type).as_str(),
        "text/html" | "application/xhtml+xml"
    )
}

static META_CHARSET: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"(?i)<meta\s[^>]*?charset\s*=\s*["']?\s*([a-z0-9_:.\-]+)"#).expect("valid regex")
});

/// Picks the document encoding: the Content-Type `charset` parameter, then a
/// `<meta>` declaration in the first 1024 bytes, then UTF-8. Unknown labels
/// are skipped. Returns the canonical encoding name.
pub fn resolve_charset(content_type: Option<&str>, body: &[u8]) -> &'static str {
    let from_header = content_type.and_then(|ct| {
        ct.split(';').skip(1).find_map(|param| {
            let (k, v) = param.split_once('=')?;
            k.trim()
                .eq_ignore_ascii_case("charset")
                .then(|| v.trim().trim_matches(['"', '\'']))
                .and_then(|label| encoding_rs::Encoding::for_label(label.as_bytes()))
        })
    });
    if let Some(enc) = from_header {
        return enc.name();
    }
    let head = &body[..body.len().min(1024)];
    let from_meta = META_CHARSET
        .captures(head)
        .and_then(|c| encoding_rs::Encoding::for_label(&c[1]))
        .map(|enc| {
            // A document that can declare itself in ASCII is not UTF-16.
            if enc == encoding_rs::UTF_16LE || enc == encoding_rs::UTF_16BE {
                encoding_rs::UTF_8
            } else {
                enc
            }
        });
    from_meta.unwrap_or(encoding_rs::UTF_8).name()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_documented_values() {
        let o = FetchOptions::default();
        assert_eq!(o.timeout_ms, 15_000);
        assert_eq!(o.max_redirects, 10);
        assert_eq!(o.max_body_bytes, 8 * 1024 * 1024);
        assert_eq!(o.user_agent, "clearlens/1.0");
        assert!(o.validate().is_ok());
    }

    #[test]
    fn invalid_options_are_rejected() {
        let o = FetchOptions {
            timeout_ms: 0,
            ..FetchOptions::default()
        };
        assert!(matches!(o.validate(), Err(FetchError::InvalidOptions(_))));
        let o = FetchOptions {
            max_body_bytes: 0,
            ..FetchOptions::default()
        };
        assert!(o.validate().is_err());
    }

    #[test]
    fn html_types() {
        assert!(is_html_type("text/html"));
        assert!(is_html_type("Text/HTML; charset=utf-8"));
        assert!(is_html_type("application/xhtml+xml"));
        assert!(!is_html_type("image/png"));
        assert!(!is_html_type("text/plain"));
        assert!(!is_html_type(""));
    }

    #[test]
    fn header_charset_wins() {
        let body = br#"<meta charset="windows-1252">"#;
        assert_eq!(resolve_charset(Some("text/html; charset=ISO-8859-2"), body), "ISO-8859-2");
        assert_eq!(resolve_charset(Some("text/html; charset=\"utf-8\""), body), "UTF-8");
    }

    #[test]
    fn meta_charset_is_sniffed() {
        assert_eq!(
            resolve_charset(Some("text/html"), br#"<head><meta charset="latin1">"#),
            "windows-1252"
        );
        assert_eq!(
            resolve_charset(
                None,
                br#"<meta http-equiv="Content-Type" content="text/html; charset=Shift_JIS">"#
            ),
            "Shift_JIS"
        );
    }

    #[test]
    fn meta_beyond_prescan_window_is_ignored() {
        let mut body = vec![b' '; 1024];
        body.extend_from_slice(br#"<meta charset="latin1">"#);
        assert_eq!(resolve_charset(None, &body), "UTF-8");
    }

    #[test]
    fn unknown_labels_fall_through() {
        assert_eq!(
            resolve_charset(Some("text/html; charset=bogus"), br#"<meta charset="koi8-r">"#),
            "KOI8-R"
        );
        assert_eq!(resolve_charset(None, b"<p>plain"), "UTF-8");
        assert_eq!(resolve_charset(None, br#"<meta charset="utf-16">"#), "UTF-8");
    }
}
