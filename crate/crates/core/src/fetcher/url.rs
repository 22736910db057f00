use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use url::Url;

/// Errors produced when user input cannot become a [`SourceUrl`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UrlError {
    #[error("malformed URL {input:?}: {reason}")]
    MalformedUrl { input: String, reason: String },
    #[error("unsupported URL scheme {scheme:?} (only http and https are fetched)")]
    UnsupportedScheme { scheme: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Http,
    Https,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Http => "http",
            Scheme::Https => "https",
        }
    }

    pub fn default_port(self) -> u16 {
        match self {
            Scheme::Http => 80,
            Scheme::Https => 443,
        }
    }
}

/// An absolute http(s) URL that the service is willing to fetch.
///
/// Parsing and reference resolution are delegated to the WHATWG parser of the
/// `url` crate; this type only narrows it to web schemes with a host.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SourceUrl {
    inner: Url,
    scheme: Scheme,
}

impl SourceUrl {
    /// Parses user input. Input without a scheme is treated as `http://`.
    pub fn parse(raw: &str) -> Result<Self, UrlError> {
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            return Err(malformed(raw, "empty input"));
        }
        let candidate = if has_scheme(trimmed) {
            trimmed.to_string()
        } else if trimmed.starts_with("//") {
            format!("http:{trimmed}")
        } else {
            format!("http://{trimmed}")
        };
        let url = Url::parse(&candidate).map_err(|e| malformed(raw, &e.to_string()))?;
        Self::from_url(url).map_err(|e| match e {
            UrlError::MalformedUrl { reason, .. } => malformed(raw, &reason),
            other => other,
        })
    }

    /// Wraps an already parsed URL, rejecting non-web schemes.
    pub fn from_url(url: Url) -> Result<Self, UrlError> {
        let scheme = match url.scheme() {
            "http" => Scheme::Http,
            "https" => Scheme::Https,
            other => {
                return Err(UrlError::UnsupportedScheme {
                    scheme: other.to_string(),
                })
            }
        };
        match url.host_str() {
            Some(h) if !h.is_empty() => {}
            _ => return Err(malformed(url.as_str(), "missing host")),
        }
        Ok(SourceUrl { inner: url, scheme })
    }

    /// Resolves `reference` against this URL.
    pub fn join(&self, reference: &str) -> Result<SourceUrl, UrlError> {
        let url = self
            .inner
            .join(reference.trim())
            .map_err(|e| malformed(reference, &e.to_string()))?;
        SourceUrl::from_url(url)
    }

    pub fn as_str(&self) -> &str {
        self.inner.as_str()
    }

    pub fn as_url(&self) -> &Url {
        &self.inner
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn host(&self) -> &str {
        self.inner.host_str().unwrap_or_default()
    }

    /// Port, with the scheme default filled in.
    pub fn port(&self) -> u16 {
        self.inner
            .port_or_known_default()
            .unwrap_or_else(|| self.scheme.default_port())
    }

    pub fn path(&self) -> &str {
        self.inner.path()
    }

    pub fn query(&self) -> Option<&str> {
        self.inner.query()
    }

    pub fn fragment(&self) -> Option<&str> {
        self.inner.fragment()
    }

    /// `scheme://host[:port]` with the port omitted when it is the default.
    pub fn origin_prefix(&self) -> String {
        let host = match self.inner.host() {
            Some(url::Host::Ipv6(addr)) => format!("[{addr}]"),
            _ => self.host().to_string(),
        };
        match self.inner.port() {
            Some(p) => format!("{}://{}:{}", self.scheme.as_str(), host, p),
            None => format!("{}://{}", self.scheme.as_str(), host),
        }
    }

    /// True when both URLs address the same scheme, host and port.
    pub fn same_origin(&self, other: &SourceUrl) -> bool {
        self.scheme == other.scheme
            && self.host().eq_ignore_ascii_case(other.host())
            && self.port() == other.port()
    }
}

fn malformed(input: &str, reason: &str) -> UrlError {
    UrlError::MalformedUrl {
        input: input.to_string(),
        reason: reason.to_string(),
    }
}

/// True when `s` starts with an RFC 3986 scheme followed by `:`, excluding
/// the `host:port` shape that users type without a scheme.
pub(crate) fn has_scheme(s: &str) -> bool {
    let Some(colon) = s.find(':') else {
        return false;
    };
    let scheme = &s[..colon];
    let valid = scheme
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic())
        && scheme
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    if !valid {
        return false;
    }
    // "example.com:8080/x" is a host and port, not a scheme.
    let rest = &s[colon + 1..];
    let port_like = !rest.is_empty()
        && rest
            .split(['/', '?', '#'])
            .next()
            .is_some_and(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_digit()));
    !(port_like && scheme.contains('.'))
        && !(port_like && scheme.eq_ignore_ascii_case("localhost"))
}

impl fmt::Display for SourceUrl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for SourceUrl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SourceUrl({:?})", self.as_str())
    }
}

impl FromStr for SourceUrl {
    type Err = UrlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SourceUrl::parse(s)
    }
}

impl Serialize for SourceUrl {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for SourceUrl {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        SourceUrl::parse(&raw).map_err(serde::de::Error::custom)
    }
}

/// Parses raw user input into a [`SourceUrl`].
pub fn parse_url(raw: &str) -> Result<SourceUrl, UrlError> {
    SourceUrl::parse(raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decomposes_https_url() {
        let u = parse_url("https://example.com/a?x=1").unwrap();
        assert_eq!(u.scheme(), Scheme::Https);
        assert_eq!(u.host(), "example.com");
        assert_eq!(u.port(), 443);
        assert_eq!(u.path(), "/a");
        assert_eq!(u.query(), Some("x=1"));
        assert_eq!(u.fragment(), None);
    }

    #[test]
    fn bare_host_defaults_to_http() {
        let u = parse_url("example.com").unwrap();
        assert_eq!(u.scheme(), Scheme::Http);
        assert_eq!(u.host(), "example.com");
        assert_eq!(u.path(), "/");
        assert_eq!(u.port(), 80);
    }

    #[test]
    fn bare_host_with_port_is_not_a_scheme() {
        let u = parse_url("example.com:8080/x").unwrap();
        assert_eq!(u.port(), 8080);
        assert_eq!(u.path(), "/x");
        let u = parse_url("localhost:3000").unwrap();
        assert_eq!(u.host(), "localhost");
        assert_eq!(u.port(), 3000);
    }

    #[test]
    fn rejects_non_web_schemes() {
        for raw in ["javascript:alert(1)", "ftp://e.com/f", "file:///etc/passwd", "data:text/html,hi"] {
            assert!(
                matches!(parse_url(raw), Err(UrlError::UnsupportedScheme { .. })),
                "{raw}"
            );
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(parse_url(""), Err(UrlError::MalformedUrl { .. })));
        assert!(matches!(parse_url("   "), Err(UrlError::MalformedUrl { .. })));
        assert!(matches!(parse_url("http://"), Err(UrlError::MalformedUrl { .. })));
        assert!(matches!(parse_url("http://exa mple.com/"), Err(UrlError::MalformedUrl { .. })));
    }

    #[test]
    fn origin_prefix_keeps_explicit_port() {
        assert_eq!(parse_url("http://e.com:8080/").unwrap().origin_prefix(), "http://e.com:8080");
        assert_eq!(parse_url("https://e.com:443/").unwrap().origin_prefix(), "https://e.com");
    }

    #[test]
    fn serialized_form_reparses_to_same_parts() {
        let u = parse_url("HTTP://Example.COM:81/a/./b/../c?q=1#f").unwrap();
        let again = parse_url(u.as_str()).unwrap();
        assert_eq!(u, again);
        assert_eq!(again.path(), "/a/c");
    }
}
