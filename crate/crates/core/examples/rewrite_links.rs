//! Route every navigable link on a page back through the service.

use clearlens::fetcher::SourceUrl;
use clearlens::html::parse_str;
use clearlens::links::{extract_links, rewrite_link, RenderTarget};

const PAGE: &str = r##"<base href="/docs/">
<a href="guide.html">relative</a> <a href="../faq?q=a b">up</a>
<a href="//cdn.example.net/x">protocol-relative</a> <a href="#top">fragment</a>
<a href="mailto:help@example.com">mail</a> <a href="javascript:go()">script</a>"##;

fn main() {
    let doc = parse_str(PAGE, SourceUrl::parse("https://example.com/index.html").unwrap());
    let target = RenderTarget::new("http://localhost:8080").carry("preset", "large-print");
    for link in extract_links(&doc) {
        println!("{:<28} {:<22} -> {}", link.original, format!("{:?}", link.classification), rewrite_link(&link, &target));
    }
}
