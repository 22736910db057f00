//! Error-tolerant HTML document model.
//!
//! Documents are arenas of [`Node`]s addressed by [`NodeId`]. Detached nodes
//! stay in the arena but are unreachable from the root; every traversal
//! starts at [`Document::root`].

mod entities;
mod serialize;
mod text;
mod tokenizer;
mod tree_builder;

use std::fmt;

use crate::fetcher::SourceUrl;

pub use serialize::serialize;
pub use text::text_content;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HtmlError {
    #[error("unsupported charset {0:?}")]
    UnsupportedCharset(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementData {
    pub tag: String,
    pub attrs: Vec<Attribute>,
}

impl ElementData {
    pub fn new(tag: impl Into<String>) -> Self {
        ElementData {
            tag: tag.into(),
            attrs: Vec::new(),
        }
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.value.as_str())
    }

    pub fn has_attr(&self, name: &str) -> bool {
        self.attrs.iter().any(|a| a.name == name)
    }

    /// Sets `name`, keeping the attribute's position if it already exists.
    pub fn set_attr(&mut self, name: &str, value: impl Into<String>) {
        let value = value.into();
        match self.attrs.iter_mut().find(|a| a.name == name) {
            Some(a) => a.value = value,
            None => self.attrs.push(Attribute {
                name: name.to_string(),
                value,
            }),
        }
    }

    pub fn remove_attr(&mut self, name: &str) -> Option<String> {
        let pos = self.attrs.iter().position(|a| a.name == name)?;
        Some(self.attrs.remove(pos).value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Element(ElementData),
    Text(String),
    Comment(String),
}

#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    parent: Option<NodeId>,
    children: Vec<NodeId>,
}

impl Node {
    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }

    pub fn children(&self) -> &[NodeId] {
        &self.children
    }

    pub fn element(&self) -> Option<&ElementData> {
        match &self.kind {
            NodeKind::Element(e) => Some(e),
            _ => None,
        }
    }

    pub fn tag(&self) -> Option<&str> {
        self.element().map(|e| e.tag.as_str())
    }

    pub fn is_element(&self, tag: &str) -> bool {
        self.tag() == Some(tag)
    }
}

#[derive(Debug, Clone)]
pub struct Document {
    nodes: Vec<Node>,
    root: NodeId,
    base_url: SourceUrl,
}

impl Document {
    /// An empty `html > head, body` skeleton.
    pub fn new(base_url: SourceUrl) -> Self {
        let mut doc = Document {
            nodes: Vec::new(),
            root: NodeId(0),
            base_url,
        };
        let root = doc.create_element(ElementData::new("html"));
        doc.root = root;
        let head = doc.create_element(ElementData::new("head"));
        let body = doc.create_element(ElementData::new("body"));
        doc.append(root, head);
        doc.append(root, body);
        doc
    }

    pub(crate) fn with_root(base_url: SourceUrl) -> Self {
        let mut doc = Document {
            nodes: Vec::new(),
            root: NodeId(0),
            base_url,
        };
        doc.root = doc.create_element(ElementData::new("html"));
        doc
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn base_url(&self) -> &SourceUrl {
        &self.base_url
    }

    pub fn set_base_url(&mut self, url: SourceUrl) {
        self.base_url = url;
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn element(&self, id: NodeId) -> Option<&ElementData> {
        self.nodes[id.0].element()
    }

    pub fn element_mut(&mut self, id: NodeId) -> Option<&mut ElementData> {
        match &mut self.nodes[id.0].kind {
            NodeKind::Element(e) => Some(e),
            _ => None,
        }
    }

    pub fn tag(&self, id: NodeId) -> Option<&str> {
        self.nodes[id.0].tag()
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.0].children
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.0].parent
    }

    /// First child element of the root with the given tag.
    fn root_child(&self, tag: &str) -> Option<NodeId> {
        self.children(self.root)
            .iter()
            .copied()
            .find(|&c| self.node(c).is_element(tag))
    }

    pub fn head(&self) -> NodeId {
        self.root_child("head")
            .expect("parsed documents always have a head")
    }

    pub fn body(&self) -> NodeId {
        self.root_child("body")
            .expect("parsed documents always have a body")
    }

    pub fn create_element(&mut self, data: ElementData) -> NodeId {
        self.push(NodeKind::Element(data))
    }

    pub fn create_text(&mut self, text: impl Into<String>) -> NodeId {
        self.push(NodeKind::Text(text.into()))
    }

    pub fn create_comment(&mut self, text: impl Into<String>) -> NodeId {
        self.push(NodeKind::Comment(text.into()))
    }

    fn push(&mut self, kind: NodeKind) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node {
            kind,
            parent: None,
            children: Vec::new(),
        });
        id
    }

    /// Removes `id` from its parent. The node and its subtree stay in the
    /// arena, unreachable.
    pub fn detach(&mut self, id: NodeId) {
        if let Some(parent) = self.nodes[id.0].parent.take() {
            self.nodes[parent.0].children.retain(|&c| c != id);
        }
    }

    pub fn append(&mut self, parent: NodeId, child: NodeId) {
        debug_assert!(!self.is_ancestor_or_self(child, parent), "cycle");
        self.detach(child);
        self.nodes[child.0].parent = Some(parent);
        self.nodes[parent.0].children.push(child);
    }

    pub fn insert_before(&mut self, parent: NodeId, child: NodeId, reference: NodeId) {
        debug_assert!(!self.is_ancestor_or_self(child, parent), "cycle");
        self.detach(child);
        let pos = self.nodes[parent.0]
            .children
            .iter()
            .position(|&c| c == reference)
            .expect("reference node is a child of parent");
        self.nodes[child.0].parent = Some(parent);
        self.nodes[parent.0].children.insert(pos, child);
    }

    pub fn prepend(&mut self, parent: NodeId, child: NodeId) {
        match self.children(parent).first().copied() {
            Some(first) if first != child => self.insert_before(parent, child, first),
            Some(_) => {}
            None => self.append(parent, child),
        }
    }

    /// Replaces `id` in its parent by its own children, in order.
    pub fn unwrap_element(&mut self, id: NodeId) {
        let Some(parent) = self.parent(id) else {
            return;
        };
        let children = std::mem::take(&mut self.nodes[id.0].children);
        let pos = self.nodes[parent.0]
            .children
            .iter()
            .position(|&c| c == id)
            .expect("child listed in parent");
        for &c in &children {
            self.nodes[c.0].parent = Some(parent);
        }
        self.nodes[parent.0]
            .children
            .splice(pos..=pos, children);
        self.nodes[id.0].parent = None;
    }

    fn is_ancestor_or_self(&self, ancestor: NodeId, mut node: NodeId) -> bool {
        loop {
            if node == ancestor {
                return true;
            }
            match self.parent(node) {
                Some(p) => node = p,
                None => return false,
            }
        }
    }

    /// Whether `id` has an ancestor element with one of `tags`.
    pub fn has_ancestor(&self, id: NodeId, tags: &[&str]) -> bool {
        let mut cur = self.parent(id);
        while let Some(p) = cur {
            if self.tag(p).is_some_and(|t| tags.contains(&t)) {
                return true;
            }
            cur = self.parent(p);
        }
        false
    }

    /// All nodes reachable from the root, in document (pre-)order.
    pub fn descendants(&self) -> Vec<NodeId> {
        self.descendants_of(self.root)
    }

    pub fn descendants_of(&self, start: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![start];
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.children(id).iter().rev().copied());
        }
        out
    }

    /// Reachable elements with the given tag, in document order.
    pub fn elements_by_tag(&self, tag: &str) -> Vec<NodeId> {
        self.descendants()
            .into_iter()
            .filter(|&id| self.node(id).is_element(tag))
            .collect()
    }

    pub fn node_count(&self) -> usize {
        self.descendants().len()
    }

    /// Merges adjacent text siblings and drops empty text nodes.
    pub fn normalize(&mut self) {
        for id in self.descendants() {
            let children = self.children(id).to_vec();
            let mut kept: Vec<NodeId> = Vec::with_capacity(children.len());
            for c in children {
                if let NodeKind::Text(t) = &self.nodes[c.0].kind {
                    if t.is_empty() {
                        self.nodes[c.0].parent = None;
                        continue;
                    }
                    if let Some(&prev) = kept.last() {
                        if let NodeKind::Text(_) = self.nodes[prev.0].kind {
                            let t = t.clone();
                            if let NodeKind::Text(p) = &mut self.nodes[prev.0].kind {
                                p.push_str(&t);
                            }
                            self.nodes[c.0].parent = None;
                            continue;
                        }
                    }
                }
                kept.push(c);
            }
            self.nodes[id.0].children = kept;
        }
    }

    /// Structural equality of the reachable trees: tags, attributes in
    /// order, text and comments.
    pub fn structurally_equal(&self, other: &Document) -> bool {
        fn eq(a: &Document, x: NodeId, b: &Document, y: NodeId) -> bool {
            a.node(x).kind == b.node(y).kind
                && a.children(x).len() == b.children(y).len()
                && a.children(x)
                    .iter()
                    .zip(b.children(y))
                    .all(|(&cx, &cy)| eq(a, cx, b, cy))
        }
        eq(self, self.root, other, other.root)
    }

    /// A readable indented dump, one node per line.
    pub fn debug_tree(&self) -> String {
        let mut out = String::new();
        self.dump(self.root, 0, &mut out);
        out
    }

    fn dump(&self, id: NodeId, depth: usize, out: &mut String) {
        use std::fmt::Write;
        let pad = "  ".repeat(depth);
        match &self.node(id).kind {
            NodeKind::Element(e) => {
                let _ = writeln!(out, "{pad}<{}>", e.tag);
                for a in &e.attrs {
                    let _ = writeln!(out, "{pad}  {}=\"{}\"", a.name, a.value);
                }
            }
            NodeKind::Text(t) => {
                let _ = writeln!(out, "{pad}\"{t}\"");
            }
            NodeKind::Comment(c) => {
                let _ = writeln!(out, "{pad}<!-- {c} -->");
            }
        }
        for &c in self.children(id) {
            self.dump(c, depth + 1, out);
        }
    }
}

/// Decodes `body` with `charset` and parses it with HTML5-style recovery.
///
/// Never fails on markup; only an unknown charset label is an error. Invalid
/// byte sequences decode to U+FFFD.
pub fn parse_html(body: &[u8], charset: &str, base_url: SourceUrl) -> Result<Document, HtmlError> {
    let encoding = encoding_rs::Encoding::for_label(charset.trim().as_bytes())
        .ok_or_else(|| HtmlError::UnsupportedCharset(charset.to_string()))?;
    let (text, _, _) = encoding.decode(body);
    Ok(parse_str(&text, base_url))
}

/// Parses already-decoded markup.
pub fn parse_str(input: &str, base_url: SourceUrl) -> Document {
    tree_builder::TreeBuilder::new(base_url).run(input)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SourceUrl {
        SourceUrl::parse("http://example.com/").unwrap()
    }

    #[test]
    fn simple_paragraph() {
        let doc = parse_str("<p>hi</p>", base());
        let body = doc.body();
        let p = doc.children(body)[0];
        assert_eq!(doc.tag(p), Some("p"));
        assert_eq!(doc.node(doc.children(p)[0]).kind, NodeKind::Text("hi".into()));
    }

    #[test]
    fn empty_input_synthesizes_skeleton() {
        let doc = parse_str("", base());
        let kids: Vec<_> = doc
            .children(doc.root())
            .iter()
            .map(|&c| doc.tag(c).unwrap())
            .collect();
        assert_eq!(kids, ["head", "body"]);
        assert!(doc.children(doc.head()).is_empty());
        assert!(doc.children(doc.body()).is_empty());
    }

    #[test]
    fn misnested_formatting_is_recovered() {
        let doc = parse_str("<p><b>x</p>more", base());
        let body = doc.body();
        let kids = doc.children(body);
        assert_eq!(kids.len(), 2);
        assert_eq!(doc.tag(kids[0]), Some("p"));
        let b_in_p = doc.children(kids[0])[0];
        assert_eq!(doc.tag(b_in_p), Some("b"));
        // "more" lands in body, under the reconstructed <b>.
        assert_eq!(doc.tag(kids[1]), Some("b"));
        assert_eq!(
            doc.node(doc.children(kids[1])[0]).kind,
            NodeKind::Text("more".into())
        );
    }

    #[test]
    fn unknown_charset_is_the_only_error() {
        assert_eq!(
            parse_html(b"<p>x", "klingon-8", base()).unwrap_err(),
            HtmlError::UnsupportedCharset("klingon-8".into())
        );
        assert!(parse_html(b"<<<>>><//", "utf-8", base()).is_ok());
    }

    #[test]
    fn invalid_bytes_become_replacement_chars() {
        let doc = parse_html(b"<p>a\xffb</p>", "utf-8", base()).unwrap();
        assert_eq!(text_content(&doc), vec!["a\u{fffd}b"]);
    }

    #[test]
    fn legacy_charset_decodes() {
        let doc = parse_html(b"<p>caf\xe9</p>", "windows-1252", base()).unwrap();
        assert_eq!(text_content(&doc), vec!["café"]);
    }

    #[test]
    fn unwrap_keeps_children_in_place() {
        let mut doc = parse_str("<p>a<font>b<i>c</i></font>d</p>", base());
        let font = doc.elements_by_tag("font")[0];
        doc.unwrap_element(font);
        let p = doc.elements_by_tag("p")[0];
        let tags: Vec<_> = doc
            .children(p)
            .iter()
            .map(|&c| match &doc.node(c).kind {
                NodeKind::Element(e) => e.tag.clone(),
                NodeKind::Text(t) => t.clone(),
                NodeKind::Comment(_) => "!".into(),
            })
            .collect();
        assert_eq!(tags, ["a", "b", "i", "d"]);
        assert_eq!(doc.parent(doc.elements_by_tag("i")[0]), Some(p));
    }

    #[test]
    fn normalize_merges_text() {
        let mut doc = parse_str("<p>a<font>b</font>c</p>", base());
        let font = doc.elements_by_tag("font")[0];
        doc.unwrap_element(font);
        doc.normalize();
        let p = doc.elements_by_tag("p")[0];
        assert_eq!(doc.children(p).len(), 1);
        assert_eq!(doc.node(doc.children(p)[0]).kind, NodeKind::Text("abc".into()));
    }
}
