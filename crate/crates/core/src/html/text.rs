use super::{Document, NodeId, NodeKind};

/// Elements whose text is never shown to the reader.
const HIDDEN: &[&str] = &["script", "style", "noscript", "template"];

/// Visible text of the document as lowercase whitespace-separated tokens.
///
/// Each text node is split on its own, so `a<span>b</span>` yields two
/// tokens. Punctuation stays attached to its token.
pub fn text_content(doc: &Document) -> Vec<String> {
    let mut tokens = Vec::new();
    collect(doc, doc.root(), &mut tokens);
    tokens
}

fn collect(doc: &Document, id: NodeId, out: &mut Vec<String>) {
    match &doc.node(id).kind {
        NodeKind::Text(t) => out.extend(t.split_whitespace().map(str::to_lowercase)),
        NodeKind::Comment(_) => {}
        NodeKind::Element(e) => {
            if HIDDEN.contains(&e.tag.as_str()) {
                return;
            }
            for &c in doc.children(id) {
                collect(doc, c, out);
            }
        }
    }
}
