//! Strip author styling and inject a Clear Print sheet.

use clearlens::fetcher::SourceUrl;
use clearlens::html::{parse_str, serialize};
use clearlens::style::{apply_clearprint, extract_style_components, PresetCatalog};

const PAGE: &str = r##"<html><head><link rel="stylesheet" href="site.css">
<style>body { background: url(noise.png) }</style></head>
<body bgcolor="#ccc"><center><font color="red" size="1">Opening hours</font></center>
<p style="color: #999">Mon to Fri, 9 to 5.</p><script>track()</script></body></html>"##;

fn main() {
    let mut doc = parse_str(PAGE, SourceUrl::parse("http://example.com/").unwrap());
    for c in extract_style_components(&doc) {
        println!("{:?} on {}", c.kind, doc.tag(c.node).unwrap_or("?"));
    }
    let preset = PresetCatalog::builtin().get("yellow-on-black").unwrap().scaled(1.25);
    let stats = apply_clearprint(&mut doc, &preset);
    println!("{stats:?}\n");
    println!("{}", serialize(&doc));
}
