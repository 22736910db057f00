//! HTML serialization following the fragment serialization rules, so that
//! output reparses to the same tree.

use super::{Document, NodeId, NodeKind};

const VOID: &[&str] = &[
    "area", "base", "basefont", "bgsound", "br", "col", "embed", "frame", "hr", "img", "input",
    "keygen", "link", "meta", "param", "source", "track", "wbr",
];

const RAW_TEXT: &[&str] = &[
    "iframe", "noembed", "noframes", "noscript", "plaintext", "script", "style", "xmp",
];

pub(crate) fn is_void(tag: &str) -> bool {
    VOID.contains(&tag)
}

/// Serializes the whole document, with a leading `<!DOCTYPE html>`.
pub fn serialize(doc: &Document) -> String {
    let mut out = String::with_capacity(doc.node_count() * 16);
    out.push_str("<!DOCTYPE html>");
    write_node(doc, doc.root(), &mut out);
    out
}

fn write_node(doc: &Document, id: NodeId, out: &mut String) {
    match &doc.node(id).kind {
        NodeKind::Text(t) => {
            let raw = doc
                .parent(id)
                .and_then(|p| doc.tag(p))
                .is_some_and(|t| RAW_TEXT.contains(&t));
            if raw {
                out.push_str(t);
            } else {
                escape_text(t, out);
            }
        }
        NodeKind::Comment(c) => {
            out.push_str("<!--");
            out.push_str(c);
            out.push_str("-->");
        }
        NodeKind::Element(e) => {
            out.push('<');
            out.push_str(&e.tag);
            for a in &e.attrs {
                out.push(' ');
                out.push_str(&a.name);
                out.push_str("=\"");
                escape_attr(&a.value, out);
                out.push('"');
            }
            out.push('>');
            if is_void(&e.tag) {
                return;
            }
            if matches!(e.tag.as_str(), "pre" | "textarea" | "listing") {
                let leading_lf = doc.children(id).first().is_some_and(|&c| {
                    matches!(&doc.node(c).kind, NodeKind::Text(t) if t.starts_with('\n'))
                });
                if leading_lf {
                    out.push('\n');
                }
            }
            for &c in doc.children(id) {
                write_node(doc, c, out);
            }
            out.push_str("</");
            out.push_str(&e.tag);
            out.push('>');
        }
    }
}

fn escape_text(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '\u{a0}' => out.push_str("&nbsp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            c => out.push(c),
        }
    }
}

fn escape_attr(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '\u{a0}' => out.push_str("&nbsp;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
}
