//! Link resolution and rewriting checked against independent oracles.

mod common;

use clearlens::fetcher::SourceUrl;
use clearlens::html::parse_str;
use clearlens::links::{extract_links, resolve, rewrite_link, split_base, RenderTarget};
use common::gen;
use common::{oracle_decode, oracle_resolve, remove_dot_segments};

const SERVICE: &str = "http://localhost:8080";

#[test]
fn dot_segment_examples() {
    assert_eq!(remove_dot_segments("/a/b/c/./../../g"), "/a/g");
    assert_eq!(remove_dot_segments("mid/content=5/../6"), "mid/6");
    assert_eq!(remove_dot_segments("/.."), "/");
}

#[test]
fn oracle_matches_published_examples() {
    let base = "http://a/b/c/d;p?q";
    for (r, want) in [
        ("g", "http://a/b/c/g"),
        ("./g", "http://a/b/c/g"),
        ("g/", "http://a/b/c/g/"),
        ("/g", "http://a/g"),
        ("//g", "http://g/"),
        ("?y", "http://a/b/c/d;p?y"),
        ("g?y", "http://a/b/c/g?y"),
        ("#s", "http://a/b/c/d;p?q#s"),
        ("", "http://a/b/c/d;p?q"),
        (".", "http://a/b/c/"),
        ("..", "http://a/b/"),
        ("../g", "http://a/b/g"),
        ("../..", "http://a/"),
        ("../../../g", "http://a/g"),
        ("/./g", "http://a/g"),
        ("g.", "http://a/b/c/g."),
        ("..g", "http://a/b/c/..g"),
        ("./../g", "http://a/b/g"),
        ("g/./h", "http://a/b/c/g/h"),
        ("g;x=1/../y", "http://a/b/c/y"),
    ] {
        assert_eq!(oracle_resolve(base, r), want, "{r:?}");
    }
}

#[test]
fn resolve_agrees_with_oracle_on_200_pairs() {
    let pairs = gen::sample((gen::base(), gen::reference()), 200);
    let mut disagreements = Vec::new();
    for (base, reference) in &pairs {
        let b = SourceUrl::parse(base).unwrap();
        let ours = resolve(&b, reference).map(|u| u.to_string());
        let want = oracle_resolve(base, reference);
        if ours.as_deref() != Ok(want.as_str()) {
            disagreements.push(format!("{base} + {reference:?}: ours {ours:?}, oracle {want}"));
        }
    }
    assert!(disagreements.is_empty(), "{}", disagreements.join("\n"));
}

/// The `url` parameter of a rewritten link, decoded by hand.
fn proxied_target(href: &str) -> String {
    let prefix = format!("{SERVICE}/render?url=");
    let encoded = href.strip_prefix(&prefix).expect("proxied link");
    let encoded = encoded.split('&').next().unwrap();
    assert!(
        encoded
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "-._~%".contains(c)),
        "reserved character left unescaped in {encoded}"
    );
    let mut rest = encoded;
    while let Some(i) = rest.find('%') {
        let hex = &rest[i + 1..i + 3];
        assert!(
            hex.chars().all(|c| c.is_ascii_digit() || c.is_ascii_uppercase()),
            "lowercase escape %{hex}"
        );
        rest = &rest[i + 3..];
    }
    oracle_decode(encoded)
}

fn attr_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('"', "&quot;")
}

#[test]
fn rewrite_round_trips_on_1000_urls() {
    let urls = gen::sample(gen::messy_url(), 1000);
    let target = RenderTarget::new(SERVICE);
    let page = SourceUrl::parse("http://origin.test/dir/page.html").unwrap();
    for raw in &urls {
        let doc = parse_str(&format!("<a href=\"{}\">x</a>", attr_escape(raw)), page.clone());
        let links = extract_links(&doc);
        let link = &links[0];
        let resolved = link.resolved.as_ref().unwrap_or_else(|| panic!("{raw:?} did not resolve"));
        let href = rewrite_link(link, &target);
        assert_eq!(proxied_target(&href), resolved.as_str(), "{raw:?}");
    }
}

#[test]
fn split_base_reassembles_1000_urls() {
    let urls = gen::sample(gen::messy_url(), 1000);
    for raw in &urls {
        let url = SourceUrl::parse(raw).unwrap();
        let parts = split_base(&url);
        assert!(parts.path_and_query.starts_with('/'), "{raw:?}");
        let again = SourceUrl::parse(&format!("{}{}", parts.base, parts.path_and_query)).unwrap();
        assert_eq!(again, url, "{raw:?}");
    }
}

#[test]
fn documented_rewrite_example() {
    let doc = parse_str(
        r#"<a href="https://e.com/p?a=1">x</a>"#,
        SourceUrl::parse("http://o.test/").unwrap(),
    );
    let href = rewrite_link(&extract_links(&doc)[0], &RenderTarget::new(SERVICE));
    assert_eq!(
        href,
        "http://localhost:8080/render?url=https%3A%2F%2Fe.com%2Fp%3Fa%3D1"
    );
}
