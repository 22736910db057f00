//! Parse messy HTML, print the tree, and write it back out.
//!
//! cargo run --example parse_serialize -- '<p>one<p>two <b>bold<i>both</b> italic</i>'

use clearlens::fetcher::SourceUrl;
use clearlens::html::{parse_str, serialize, text_content};

fn main() {
    let input = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "<title>t</title><p>one<p>two <b>bold<i>both</b> italic</i>".into());
    let doc = parse_str(&input, SourceUrl::parse("http://example.com/").unwrap());
    print!("{}", doc.debug_tree());
    println!("{}", serialize(&doc));
    println!("words: {:?}", text_content(&doc));
}
