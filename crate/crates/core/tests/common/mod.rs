//! Helpers shared by the integration tests.
//!
//! Output checks reparse with html5ever rather than the crate's own parser,
//! and URL resolution is checked against a small RFC 3986 resolver written
//! here from the RFC's pseudocode.
#![allow(dead_code)]

use std::fmt::Write;
use std::net::SocketAddr;

use clearlens::fixtures::FixtureOrigin;
use clearlens::html::{Document, NodeId, NodeKind};
use clearlens::service::{serve_on, AppState, ServiceConfig};
use html5ever::tendril::TendrilSink;
use markup5ever_rcdom::{Handle, NodeData, RcDom, SerializableHandle};
use tokio::net::TcpListener;
use tokio::task::JoinHandle;

pub const PRESENTATIONAL: &[&str] = &[
    "font", "bgcolor", "color", "align", "text", "link", "vlink", "alink", "background", "border",
    "cellpadding", "cellspacing", "valign",
];
const MEDIA: &[&str] = &[
    "img", "video", "audio", "canvas", "iframe", "embed", "object", "svg", "source", "picture",
    "input",
];
const WRAPPERS: &[&str] = &["font", "center", "big", "small", "marquee", "blink"];

pub struct El {
    pub tag: String,
    pub attrs: Vec<(String, String)>,
}

impl El {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }
}

fn reference_dom(html: &str) -> RcDom {
    html5ever::parse_document(RcDom::default(), Default::default()).one(html)
}

fn walk(h: &Handle, skip_text_in: &[&str], els: &mut Vec<El>, tokens: &mut Vec<String>) {
    match &h.data {
        NodeData::Element { name, attrs, .. } => {
            let tag = name.local.to_string();
            els.push(El {
                tag: tag.clone(),
                attrs: attrs
                    .borrow()
                    .iter()
                    .map(|a| (a.name.local.to_string(), a.value.to_string()))
                    .collect(),
            });
            if skip_text_in.contains(&tag.as_str()) {
                return;
            }
        }
        NodeData::Text { contents } => {
            tokens.extend(
                contents
                    .borrow()
                    .split_whitespace()
                    .map(str::to_lowercase),
            );
        }
        _ => {}
    }
    for c in h.children.borrow().iter() {
        walk(c, skip_text_in, els, tokens);
    }
}

/// Indented dump of a parsed tree from the `html` element down.
pub fn outline(doc: &Document) -> String {
    fn walk(doc: &Document, id: NodeId, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        match &doc.node(id).kind {
            NodeKind::Element(e) => {
                writeln!(out, "{pad}<{}>", e.tag).unwrap();
                for a in &e.attrs {
                    writeln!(out, "{pad}  {}={:?}", a.name, a.value).unwrap();
                }
            }
            NodeKind::Text(t) => writeln!(out, "{pad}{t:?}").unwrap(),
            NodeKind::Comment(c) => writeln!(out, "{pad}<!--{c}-->").unwrap(),
        }
        for &c in doc.children(id) {
            walk(doc, c, depth + 1, out);
        }
    }
    let mut out = String::new();
    walk(doc, doc.root(), 0, &mut out);
    out
}

fn reference_html_outline(dom: &RcDom) -> String {
    fn walk(h: &Handle, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        match &h.data {
            NodeData::Element {
                name,
                attrs,
                template_contents,
                ..
            } => {
                writeln!(out, "{pad}<{}>", name.local).unwrap();
                for a in attrs.borrow().iter() {
                    writeln!(out, "{pad}  {}={:?}", a.name.local, a.value.to_string()).unwrap();
                }
                if let Some(contents) = template_contents.borrow().as_ref() {
                    for c in contents.children.borrow().iter() {
                        walk(c, depth + 1, out);
                    }
                }
            }
            NodeData::Text { contents } => {
                writeln!(out, "{pad}{:?}", contents.borrow().to_string()).unwrap()
            }
            NodeData::Comment { contents } => writeln!(out, "{pad}<!--{contents}-->").unwrap(),
            _ => {}
        }
        for c in h.children.borrow().iter() {
            walk(c, depth + 1, out);
        }
    }
    let html = dom
        .document
        .children
        .borrow()
        .iter()
        .find(|c| matches!(&c.data, NodeData::Element { .. }))
        .cloned()
        .expect("html element");
    let mut out = String::new();
    walk(&html, 0, &mut out);
    out
}

/// The same dump as [`outline`] for html5ever's parse of `input`.
/// Template contents are dumped as ordinary children.
pub fn reference_outline(input: &str) -> String {
    reference_html_outline(&reference_dom(input))
}

/// Whether html5ever's own serializer reproduces the tree it parsed.
/// Some trees (nested anchors via foster parenting, for one) have no
/// markup that parses back to them.
pub fn reference_round_trips(input: &str) -> bool {
    let dom = reference_dom(input);
    let mut bytes = Vec::new();
    html5ever::serialize(
        &mut bytes,
        &SerializableHandle::from(dom.document.clone()),
        Default::default(),
    )
    .unwrap();
    let again = reference_dom(&String::from_utf8(bytes).unwrap());
    reference_html_outline(&again) == reference_html_outline(&dom)
}

/// Elements in document order, according to html5ever.
pub fn reference_elements(html: &str) -> Vec<El> {
    let dom = reference_dom(html);
    let (mut els, mut tokens) = (Vec::new(), Vec::new());
    walk(&dom.document, &[], &mut els, &mut tokens);
    els
}

/// Visible text tokens, lowercased, according to html5ever.
pub fn reference_tokens(html: &str) -> Vec<String> {
    let dom = reference_dom(html);
    let (mut els, mut tokens) = (Vec::new(), Vec::new());
    walk(
        &dom.document,
        &["script", "style", "noscript", "template"],
        &mut els,
        &mut tokens,
    );
    tokens
}

/// Every way `html` breaks the output contract for pages rewritten to
/// `service_base`. Empty when the page is clean.
pub fn audit(html: &str, service_base: &str) -> Vec<String> {
    let render = format!("{service_base}/render?url=");
    let mut v = Vec::new();
    let els = reference_elements(html);
    let mut marked = 0;
    for el in &els {
        let t = el.tag.as_str();
        match t {
            "script" => v.push("script element".to_string()),
            "style" if el.attr("data-clearlens").is_some() => marked += 1,
            "style" => v.push("unmarked style element".into()),
            "link"
                if el
                    .attr("rel")
                    .is_some_and(|r| r.to_ascii_lowercase().split_whitespace().any(|x| x == "stylesheet")) =>
            {
                v.push(format!("stylesheet link {:?}", el.attr("href")))
            }
            _ if WRAPPERS.contains(&t) => v.push(format!("wrapper element <{t}>")),
            _ => {}
        }
        for (k, _) in &el.attrs {
            if k == "style" {
                v.push(format!("style attribute on <{t}>"));
            }
            if PRESENTATIONAL.contains(&k.as_str())
                || ((k == "width" || k == "height") && !MEDIA.contains(&t))
            {
                v.push(format!("presentational {k} on <{t}>"));
            }
            if k.len() > 2 && k.starts_with("on") {
                v.push(format!("event handler {k} on <{t}>"));
            }
        }
        if t == "a" {
            if let Some(href) = el.attr("href") {
                let ok = href.starts_with(&render)
                    || href.starts_with('#')
                    || href.starts_with("mailto:")
                    || href.starts_with("tel:");
                if !ok {
                    v.push(format!("unproxied href {href:?}"));
                }
            }
        }
    }
    if marked != 1 {
        v.push(format!("{marked} marked stylesheets"));
    }
    v
}

// RFC 3986 reference resolution, written independently of the url crate.

pub struct Parts<'a> {
    pub scheme: Option<&'a str>,
    pub authority: Option<&'a str>,
    pub path: &'a str,
    pub query: Option<&'a str>,
    pub fragment: Option<&'a str>,
}

/// Splits a URI reference with the RFC's appendix B regular expression.
pub fn split(uri: &str) -> Parts<'_> {
    let re = regex::Regex::new(r"^(([^:/?#]+):)?(//([^/?#]*))?([^?#]*)(\?([^#]*))?(#(.*))?")
        .expect("static regex");
    let c = re.captures(uri).expect("matches everything");
    let g = |i| c.get(i).map(|m: regex::Match<'_>| m.as_str());
    Parts {
        scheme: g(2),
        authority: g(4),
        path: g(5).unwrap_or(""),
        query: g(7),
        fragment: g(9),
    }
}

pub fn remove_dot_segments(input: &str) -> String {
    let mut input = input.to_string();
    let mut output = String::new();
    while !input.is_empty() {
        if let Some(rest) = input.strip_prefix("../") {
            input = rest.to_string();
        } else if let Some(rest) = input.strip_prefix("./") {
            input = rest.to_string();
        } else if input.starts_with("/./") {
            input = input[2..].to_string();
        } else if input == "/." {
            input = "/".to_string();
        } else if input.starts_with("/../") || input == "/.." {
            input = format!("/{}", &input[if input == "/.." { 3 } else { 4 }..]);
            match output.rfind('/') {
                Some(i) => output.truncate(i),
                None => output.clear(),
            }
        } else if input == "." || input == ".." {
            input.clear();
        } else {
            let start = usize::from(input.starts_with('/'));
            let end = input[start..].find('/').map_or(input.len(), |i| i + start);
            output.push_str(&input[..end]);
            input = input[end..].to_string();
        }
    }
    output
}

fn merge(base: &Parts<'_>, ref_path: &str) -> String {
    if base.authority.is_some() && base.path.is_empty() {
        format!("/{ref_path}")
    } else {
        match base.path.rfind('/') {
            Some(i) => format!("{}{ref_path}", &base.path[..=i]),
            None => ref_path.to_string(),
        }
    }
}

/// Strict reference resolution. An empty path with an authority is
/// written as `/`, which is equivalent for http(s).
pub fn oracle_resolve(base: &str, reference: &str) -> String {
    let b = split(base);
    let r = split(reference);
    let (scheme, authority, path, query);
    if let Some(s) = r.scheme {
        scheme = s.to_string();
        authority = r.authority.map(str::to_string);
        path = remove_dot_segments(r.path);
        query = r.query;
    } else {
        scheme = b.scheme.unwrap_or_default().to_string();
        if r.authority.is_some() {
            authority = r.authority.map(str::to_string);
            path = remove_dot_segments(r.path);
            query = r.query;
        } else {
            authority = b.authority.map(str::to_string);
            if r.path.is_empty() {
                path = b.path.to_string();
                query = r.query.or(b.query);
            } else {
                path = if r.path.starts_with('/') {
                    remove_dot_segments(r.path)
                } else {
                    remove_dot_segments(&merge(&b, r.path))
                };
                query = r.query;
            }
        }
    }
    let mut out = format!("{scheme}:");
    if let Some(a) = authority {
        out.push_str("//");
        out.push_str(&a);
        out.push_str(if path.is_empty() { "/" } else { &path });
    } else {
        out.push_str(&path);
    }
    if let Some(q) = query {
        out.push('?');
        out.push_str(q);
    }
    if let Some(f) = r.fragment {
        out.push('#');
        out.push_str(f);
    }
    out
}

/// Percent-decoding written out by hand.
pub fn oracle_decode(s: &str) -> String {
    let b = s.as_bytes();
    let mut out = Vec::with_capacity(b.len());
    let mut i = 0;
    while i < b.len() {
        if b[i] == b'%' && i + 2 < b.len() {
            let hex = std::str::from_utf8(&b[i + 1..i + 3]).ok();
            if let Some(v) = hex.and_then(|h| u8::from_str_radix(h, 16).ok()) {
                out.push(v);
                i += 3;
                continue;
            }
        }
        out.push(b[i]);
        i += 1;
    }
    String::from_utf8(out).expect("valid UTF-8 after decoding")
}

/// Generated `(base, reference)` pairs restricted to the syntax where
/// RFC 3986 and WHATWG parsing agree: lowercase hosts, no default ports,
/// no backslashes or percent signs, and no same-scheme relative forms.
pub mod gen {
    use proptest::prelude::*;

    fn segment() -> impl Strategy<Value = String> {
        prop_oneof![
            3 => "[a-z0-9_~-]{1,6}",
            1 => Just(".".to_string()),
            1 => Just("..".to_string()),
            1 => "[a-z]{1,3}\\.[a-z]{2,4}",
        ]
    }

    fn rel_path() -> impl Strategy<Value = String> {
        (prop::collection::vec(segment(), 1..5), any::<bool>()).prop_map(|(segs, slash)| {
            let mut p = segs.join("/");
            if slash {
                p.push('/');
            }
            p
        })
    }

    fn authority() -> impl Strategy<Value = String> {
        (
            "[a-z][a-z0-9-]{0,8}(\\.[a-z]{2,5}){1,2}",
            prop::option::of(1024u16..65535),
        )
            .prop_map(|(h, p)| match p {
                Some(p) => format!("{h}:{p}"),
                None => h,
            })
    }

    fn query() -> impl Strategy<Value = String> {
        "[a-z0-9=&]{0,8}"
    }

    fn fragment() -> impl Strategy<Value = String> {
        "[a-z0-9]{0,6}"
    }

    pub fn base() -> impl Strategy<Value = String> {
        (
            prop_oneof!["http", "https"],
            authority(),
            prop::collection::vec("[a-z0-9_-]{1,6}", 0..4),
            any::<bool>(),
            prop::option::of(query()),
        )
            .prop_map(|(s, a, segs, slash, q)| {
                let mut out = format!("{s}://{a}/{}", segs.join("/"));
                if slash && !segs.is_empty() {
                    out.push('/');
                }
                if let Some(q) = q {
                    out.push('?');
                    out.push_str(&q);
                }
                out
            })
    }

    fn tail() -> impl Strategy<Value = String> {
        (prop::option::of(query()), prop::option::of(fragment())).prop_map(|(q, f)| {
            let mut s = String::new();
            if let Some(q) = q {
                s.push('?');
                s.push_str(&q);
            }
            if let Some(f) = f {
                s.push('#');
                s.push_str(&f);
            }
            s
        })
    }

    pub fn reference() -> impl Strategy<Value = String> {
        prop_oneof![
            3 => (rel_path(), tail()).prop_map(|(p, t)| format!("{p}{t}")),
            2 => (rel_path(), tail()).prop_map(|(p, t)| format!("/{p}{t}")),
            1 => (authority(), rel_path(), tail()).prop_map(|(a, p, t)| format!("//{a}/{p}{t}")),
            1 => (prop_oneof!["http", "https"], authority(), rel_path(), tail())
                .prop_map(|(s, a, p, t)| format!("{s}://{a}/{p}{t}")),
            1 => tail(),
            1 => prop_oneof![Just(".".to_string()), Just("..".to_string()), Just("../..".to_string()), Just("./".to_string())],
        ]
    }

    /// Absolute URLs with arbitrary printable text in path, query and
    /// fragment, for encoding round trips.
    pub fn messy_url() -> impl Strategy<Value = String> {
        (
            prop_oneof!["http", "https"],
            "[a-z]{1,8}\\.(com|org|test)",
            "[ -~\u{a0}-\u{17f}\u{4e00}-\u{4e20}]{0,20}",
            "[ -~\u{e9}\u{fc}]{0,20}",
        )
            .prop_map(|(s, h, p, q)| {
                let p = p.replace(['?', '#', '\\'], "_");
                format!("{s}://{h}/{p}?{q}")
            })
    }

    /// Draws `n` values deterministically.
    pub fn sample<S: Strategy>(strategy: S, n: usize) -> Vec<S::Value> {
        use proptest::strategy::ValueTree;
        use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
        let mut runner = TestRunner::new_with_rng(
            Config::default(),
            TestRng::deterministic_rng(RngAlgorithm::ChaCha),
        );
        (0..n)
            .map(|_| strategy.new_tree(&mut runner).expect("strategy").current())
            .collect()
    }
}

/// A running service bound to an ephemeral port, public at its own
/// address.
pub struct TestService {
    pub addr: SocketAddr,
    pub base: String,
    task: JoinHandle<()>,
}

impl TestService {
    pub async fn start(configure: impl FnOnce(&mut ServiceConfig)) -> TestService {
        let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        let mut cfg = ServiceConfig {
            listen_address: addr.to_string(),
            public_base: format!("http://{addr}"),
            ..ServiceConfig::default()
        };
        configure(&mut cfg);
        let base = cfg.public_base.clone();
        let state = AppState::new(cfg).expect("valid test config");
        let task = tokio::spawn(async move {
            serve_on(listener, state, std::future::pending()).await.unwrap();
        });
        TestService { addr, base, task }
    }

    pub fn url(&self, path_and_query: &str) -> String {
        format!("http://{}{path_and_query}", self.addr)
    }

    /// `/render` for a page on the origin.
    pub fn render_url(&self, origin: &FixtureOrigin, path: &str, extra: &str) -> String {
        let target = origin.url(path);
        self.url(&format!(
            "/render?url={}{extra}",
            clearlens::links::encode_component(target.as_str())
        ))
    }
}

impl Drop for TestService {
    fn drop(&mut self) {
        self.task.abort();
    }
}

pub fn client() -> reqwest::Client {
    reqwest::Client::builder()
        .redirect(reqwest::redirect::Policy::none())
        .build()
        .unwrap()
}
