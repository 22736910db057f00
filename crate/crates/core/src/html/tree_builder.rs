//! Tree construction with HTML5 insertion modes: implied structure, the
//! active formatting list with adoption agency, table foster parenting and
//! template modes. Documents are always parsed in no-quirks mode and foreign
//! (SVG/MathML) content is treated as ordinary elements that honour
//! self-closing syntax.

use super::tokenizer::{normalize_newlines, Tag, TextMode, Token, Tokenizer};
use super::{Document, ElementData, NodeId, NodeKind};
use crate::fetcher::SourceUrl;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Initial,
    BeforeHtml,
    BeforeHead,
    InHead,
    AfterHead,
    InBody,
    Text,
    InTable,
    InTableText,
    InCaption,
    InColumnGroup,
    InTableBody,
    InRow,
    InCell,
    InTemplate,
    AfterBody,
    InFrameset,
    AfterFrameset,
    AfterAfterBody,
    AfterAfterFrameset,
}

enum Step {
    Done,
    Reprocess(Token),
}

#[derive(Debug, Clone)]
enum Entry {
    Marker,
    Element(NodeId, Tag),
}

enum Bookmark {
    Replace,
    InsertAfter(NodeId),
}

#[derive(Clone, Copy)]
enum Scope {
    Default,
    ListItem,
    Button,
    Table,
}

const FORMATTING: &[&str] = &[
    "a", "b", "big", "code", "em", "font", "i", "nobr", "s", "small", "strike", "strong", "tt", "u",
];

const SPECIAL: &[&str] = &[
    "address", "applet", "area", "article", "aside", "base", "basefont", "bgsound", "blockquote",
    "body", "br", "button", "caption", "center", "col", "colgroup", "dd", "details", "dir", "div",
    "dl", "dt", "embed", "fieldset", "figcaption", "figure", "footer", "form", "frame", "frameset",
    "h1", "h2", "h3", "h4", "h5", "h6", "head", "header", "hgroup", "hr", "html", "iframe", "img",
    "input", "keygen", "li", "link", "listing", "main", "marquee", "menu", "meta", "nav",
    "noembed", "noframes", "noscript", "object", "ol", "p", "param", "plaintext", "pre", "script",
    "search", "section", "select", "source", "style", "summary", "table", "tbody", "td",
    "template", "textarea", "tfoot", "th", "thead", "title", "tr", "track", "ul", "wbr", "xmp",
];

const BLOCK_START: &[&str] = &[
    "address", "article", "aside", "blockquote", "center", "details", "dialog", "dir", "div", "dl",
    "fieldset", "figcaption", "figure", "footer", "header", "hgroup", "main", "menu", "nav", "ol",
    "p", "search", "section", "summary", "ul",
];

const BLOCK_END: &[&str] = &[
    "address", "article", "aside", "blockquote", "button", "center", "details", "dialog", "dir",
    "div", "dl", "fieldset", "figcaption", "figure", "footer", "header", "hgroup", "listing",
    "main", "menu", "nav", "ol", "pre", "search", "section", "select", "summary", "ul",
];

const HEADINGS: &[&str] = &["h1", "h2", "h3", "h4", "h5", "h6"];

const IMPLIED_END: &[&str] = &[
    "dd", "dt", "li", "optgroup", "option", "p", "rb", "rp", "rt", "rtc",
];

const IMPLIED_END_THOROUGH: &[&str] = &[
    "caption", "colgroup", "dd", "dt", "li", "optgroup", "option", "p", "rb", "rp", "rt", "rtc",
    "tbody", "td", "tfoot", "th", "thead", "tr",
];

const HEAD_CONTENT: &[&str] = &[
    "base", "basefont", "bgsound", "link", "meta", "noframes", "script", "style", "template",
    "title",
];

fn is_ws_str(s: &str) -> bool {
    s.bytes().all(|b| matches!(b, b'\t' | b'\n' | 0x0C | b'\r' | b' '))
}

/// Splits leading HTML whitespace from the rest.
fn split_ws(s: &str) -> (&str, &str) {
    let n = s
        .bytes()
        .take_while(|b| matches!(b, b'\t' | b'\n' | 0x0C | b'\r' | b' '))
        .count();
    s.split_at(n)
}

fn one_of(tag: &str, set: &[&str]) -> bool {
    set.contains(&tag)
}

pub(crate) struct TreeBuilder {
    doc: Document,
    open: Vec<NodeId>,
    formatting: Vec<Entry>,
    head: Option<NodeId>,
    form: Option<NodeId>,
    mode: Mode,
    original_mode: Mode,
    template_modes: Vec<Mode>,
    frameset_ok: bool,
    foster_parenting: bool,
    ignore_lf: bool,
    pending_table_text: Vec<String>,
    switch: Option<(TextMode, String)>,
}

impl TreeBuilder {
    pub fn new(base_url: SourceUrl) -> Self {
        TreeBuilder {
            doc: Document::with_root(base_url),
            open: Vec::new(),
            formatting: Vec::new(),
            head: None,
            form: None,
            mode: Mode::Initial,
            original_mode: Mode::Initial,
            template_modes: Vec::new(),
            frameset_ok: true,
            foster_parenting: false,
            ignore_lf: false,
            pending_table_text: Vec::new(),
            switch: None,
        }
    }

    pub fn run(mut self, input: &str) -> Document {
        let input = normalize_newlines(input);
        let mut tokenizer = Tokenizer::new(&input);
        loop {
            let mut token = tokenizer.next_token();
            if std::mem::take(&mut self.ignore_lf) {
                if let Token::Characters(s) = &mut token {
                    if s.starts_with('\n') {
                        s.remove(0);
                        if s.is_empty() {
                            continue;
                        }
                    }
                }
            }
            let eof = token == Token::Eof;
            self.process(token);
            if let Some((mode, name)) = self.switch.take() {
                tokenizer.switch_to(mode, &name);
            }
            if eof {
                break;
            }
        }
        self.finish()
    }

    fn finish(mut self) -> Document {
        let root = self.doc.root();
        let has = |doc: &Document, tag: &str| {
            doc.children(root)
                .iter()
                .any(|&c| doc.node(c).is_element(tag))
        };
        if !has(&self.doc, "head") {
            let head = self.doc.create_element(ElementData::new("head"));
            self.doc.prepend(root, head);
        }
        if !has(&self.doc, "body") {
            let body = self.doc.create_element(ElementData::new("body"));
            self.doc.append(root, body);
        }
        self.doc
    }

    fn process(&mut self, mut token: Token) {
        loop {
            match self.dispatch(self.mode, token) {
                Step::Done => return,
                Step::Reprocess(t) => token = t,
            }
        }
    }

    fn dispatch(&mut self, mode: Mode, token: Token) -> Step {
        match mode {
            Mode::Initial => self.initial(token),
            Mode::BeforeHtml => self.before_html(token),
            Mode::BeforeHead => self.before_head(token),
            Mode::InHead => self.in_head(token),
            Mode::AfterHead => self.after_head(token),
            Mode::InBody => self.in_body(token),
            Mode::Text => self.text(token),
            Mode::InTable => self.in_table(token),
            Mode::InTableText => self.in_table_text(token),
            Mode::InCaption => self.in_caption(token),
            Mode::InColumnGroup => self.in_column_group(token),
            Mode::InTableBody => self.in_table_body(token),
            Mode::InRow => self.in_row(token),
            Mode::InCell => self.in_cell(token),
            Mode::InTemplate => self.in_template(token),
            Mode::AfterBody => self.after_body(token),
            Mode::InFrameset => self.in_frameset(token),
            Mode::AfterFrameset => self.after_frameset(token),
            Mode::AfterAfterBody => self.after_after_body(token),
            Mode::AfterAfterFrameset => self.after_after_frameset(token),
        }
    }

    // ---- tree helpers -------------------------------------------------

    fn tag_of(&self, id: NodeId) -> &str {
        self.doc.tag(id).unwrap_or("")
    }

    fn current(&self) -> NodeId {
        *self.open.last().expect("open element stack is not empty")
    }

    fn current_tag(&self) -> &str {
        self.open.last().map_or("", |&id| self.tag_of(id))
    }

    fn create_element(&mut self, tag: &Tag) -> NodeId {
        self.doc.create_element(ElementData {
            tag: tag.name.clone(),
            attrs: tag.attrs.clone(),
        })
    }

    /// The appropriate place for inserting a node: a parent and an optional
    /// sibling to insert before.
    fn insertion_place(&self, override_target: Option<NodeId>) -> (NodeId, Option<NodeId>) {
        let target = override_target.unwrap_or_else(|| self.current());
        if self.foster_parenting
            && one_of(self.tag_of(target), &["table", "tbody", "tfoot", "thead", "tr"])
        {
            let last_table = self.open.iter().rposition(|&n| self.tag_of(n) == "table");
            let last_template = self.open.iter().rposition(|&n| self.tag_of(n) == "template");
            if let Some(tpl) = last_template {
                if last_table.is_none_or(|t| tpl > t) {
                    return (self.open[tpl], None);
                }
            }
            return match last_table {
                None => (self.open[0], None),
                Some(ti) => {
                    let table = self.open[ti];
                    match self.doc.parent(table) {
                        Some(p) => (p, Some(table)),
                        None => (self.open[ti - 1], None),
                    }
                }
            };
        }
        (target, None)
    }

    fn insert_at(&mut self, (parent, before): (NodeId, Option<NodeId>), node: NodeId) {
        match before {
            Some(b) => self.doc.insert_before(parent, node, b),
            None => self.doc.append(parent, node),
        }
    }

    fn insert_element(&mut self, tag: &Tag) -> NodeId {
        let place = self.insertion_place(None);
        let id = self.create_element(tag);
        self.insert_at(place, id);
        self.open.push(id);
        id
    }

    fn insert_named(&mut self, name: &str) -> NodeId {
        self.insert_element(&Tag::named(name))
    }

    fn insert_void(&mut self, tag: &Tag) {
        self.insert_element(tag);
        self.open.pop();
    }

    fn insert_chars(&mut self, text: &str) {
        if text.is_empty() {
            return;
        }
        let (parent, before) = self.insertion_place(None);
        let siblings = self.doc.children(parent);
        let prev = match before {
            Some(b) => {
                let pos = siblings.iter().position(|&c| c == b).unwrap_or(0);
                pos.checked_sub(1).map(|p| siblings[p])
            }
            None => siblings.last().copied(),
        };
        if let Some(prev) = prev {
            if let NodeKind::Text(existing) = &mut self.doc.nodes[prev.index()].kind {
                existing.push_str(text);
                return;
            }
        }
        let id = self.doc.create_text(text);
        self.insert_at((parent, before), id);
    }

    fn insert_comment(&mut self, text: String) {
        let place = self.insertion_place(None);
        let id = self.doc.create_comment(text);
        self.insert_at(place, id);
    }

    fn in_scope_where(&self, pred: impl Fn(&str) -> bool, scope: Scope) -> bool {
        for &id in self.open.iter().rev() {
            let tag = self.tag_of(id);
            if pred(tag) {
                return true;
            }
            if is_scope_boundary(tag, scope) {
                return false;
            }
        }
        false
    }

    fn in_scope(&self, name: &str, scope: Scope) -> bool {
        self.in_scope_where(|t| t == name, scope)
    }

    fn node_in_scope(&self, node: NodeId) -> bool {
        for &id in self.open.iter().rev() {
            if id == node {
                return true;
            }
            if is_scope_boundary(self.tag_of(id), Scope::Default) {
                return false;
            }
        }
        false
    }

    fn generate_implied_end_tags(&mut self, except: Option<&str>) {
        while let Some(&cur) = self.open.last() {
            let tag = self.tag_of(cur);
            if one_of(tag, IMPLIED_END) && Some(tag) != except {
                self.open.pop();
            } else {
                break;
            }
        }
    }

    fn generate_implied_end_tags_thoroughly(&mut self) {
        while let Some(&cur) = self.open.last() {
            if one_of(self.tag_of(cur), IMPLIED_END_THOROUGH) {
                self.open.pop();
            } else {
                break;
            }
        }
    }

    fn pop_until(&mut self, name: &str) {
        while let Some(id) = self.open.pop() {
            if self.tag_of(id) == name {
                break;
            }
        }
    }

    fn pop_until_any(&mut self, names: &[&str]) {
        while let Some(id) = self.open.pop() {
            if one_of(self.tag_of(id), names) {
                break;
            }
        }
    }

    fn clear_stack_back_to(&mut self, names: &[&str]) {
        while !one_of(self.current_tag(), names) {
            self.open.pop();
        }
    }

    fn close_p(&mut self) {
        self.generate_implied_end_tags(Some("p"));
        self.pop_until("p");
    }

    fn close_p_in_button_scope(&mut self) {
        if self.in_scope("p", Scope::Button) {
            self.close_p();
        }
    }

    fn in_foreign(&self) -> bool {
        self.open
            .iter()
            .any(|&id| matches!(self.tag_of(id), "svg" | "math"))
    }

    fn switch_tokenizer(&mut self, mode: TextMode, name: &str) {
        self.switch = Some((mode, name.to_string()));
    }

    fn generic_text_element(&mut self, tag: &Tag, mode: TextMode) {
        self.insert_element(tag);
        self.switch_tokenizer(mode, &tag.name);
        self.original_mode = self.mode;
        self.mode = Mode::Text;
    }

    // ---- active formatting elements -----------------------------------

    fn formatting_position(&self, node: NodeId) -> Option<usize> {
        self.formatting
            .iter()
            .position(|e| matches!(e, Entry::Element(id, _) if *id == node))
    }

    fn push_formatting(&mut self, node: NodeId, tag: &Tag) {
        // At most three identical entries after the last marker.
        let mut same = Vec::new();
        for (i, e) in self.formatting.iter().enumerate().rev() {
            match e {
                Entry::Marker => break,
                Entry::Element(_, t) if t.name == tag.name && same_attrs(t, tag) => same.push(i),
                Entry::Element(..) => {}
            }
        }
        if same.len() >= 3 {
            let earliest = *same.last().expect("non-empty");
            self.formatting.remove(earliest);
        }
        self.formatting.push(Entry::Element(node, tag.clone()));
    }

    fn clear_formatting_to_marker(&mut self) {
        while let Some(e) = self.formatting.pop() {
            if matches!(e, Entry::Marker) {
                break;
            }
        }
    }

    fn reconstruct_formatting(&mut self) {
        let Some(last) = self.formatting.last() else {
            return;
        };
        let in_open = |b: &Self, e: &Entry| match e {
            Entry::Marker => true,
            Entry::Element(id, _) => b.open.contains(id),
        };
        if in_open(self, last) {
            return;
        }
        let mut i = self.formatting.len() - 1;
        while i > 0 && !in_open(self, &self.formatting[i - 1]) {
            i -= 1;
        }
        for j in i..self.formatting.len() {
            let Entry::Element(_, tag) = self.formatting[j].clone() else {
                continue;
            };
            let new = self.insert_element(&tag);
            self.formatting[j] = Entry::Element(new, tag);
        }
    }

    /// Returns false when the caller should fall back to the generic end
    /// tag handling.
    fn adoption_agency(&mut self, subject: &str) -> bool {
        let cur = self.current();
        if self.tag_of(cur) == subject && self.formatting_position(cur).is_none() {
            self.open.pop();
            return true;
        }
        for _ in 0..8 {
            let mut found = None;
            for (i, e) in self.formatting.iter().enumerate().rev() {
                match e {
                    Entry::Marker => break,
                    Entry::Element(id, t) if t.name == subject => {
                        found = Some((i, *id, t.clone()));
                        break;
                    }
                    Entry::Element(..) => {}
                }
            }
            let Some((fe_pos, fe, fe_tag)) = found else {
                return false;
            };
            let Some(fe_stack) = self.open.iter().position(|&n| n == fe) else {
                self.formatting.remove(fe_pos);
                return true;
            };
            if !self.node_in_scope(fe) {
                return true;
            }
            let furthest = self.open[fe_stack + 1..]
                .iter()
                .position(|&n| one_of(self.tag_of(n), SPECIAL))
                .map(|i| fe_stack + 1 + i);
            let Some(fb_idx) = furthest else {
                self.open.truncate(fe_stack);
                self.formatting.remove(fe_pos);
                return true;
            };
            let furthest_block = self.open[fb_idx];
            let common_ancestor = self.open[fe_stack - 1];
            let mut bookmark = Bookmark::Replace;
            let mut node_idx = fb_idx;
            let mut last_node = furthest_block;
            let mut inner = 0;
            loop {
                inner += 1;
                node_idx -= 1;
                let node = self.open[node_idx];
                if node == fe {
                    break;
                }
                if inner > 3 {
                    if let Some(p) = self.formatting_position(node) {
                        self.formatting.remove(p);
                    }
                }
                let Some(p) = self.formatting_position(node) else {
                    self.open.remove(node_idx);
                    continue;
                };
                let Entry::Element(_, tag) = self.formatting[p].clone() else {
                    unreachable!("position only matches elements")
                };
                let new = self.create_element(&tag);
                self.formatting[p] = Entry::Element(new, tag);
                self.open[node_idx] = new;
                if last_node == furthest_block {
                    bookmark = Bookmark::InsertAfter(new);
                }
                self.doc.append(new, last_node);
                last_node = new;
            }
            let place = self.insertion_place(Some(common_ancestor));
            self.doc.detach(last_node);
            self.insert_at(place, last_node);

            let new_fe = self.create_element(&fe_tag);
            for c in self.doc.children(furthest_block).to_vec() {
                self.doc.append(new_fe, c);
            }
            self.doc.append(furthest_block, new_fe);

            match bookmark {
                Bookmark::Replace => {
                    let p = self.formatting_position(fe).expect("formatting element listed");
                    self.formatting[p] = Entry::Element(new_fe, fe_tag);
                }
                Bookmark::InsertAfter(n) => {
                    let p = self.formatting_position(fe).expect("formatting element listed");
                    self.formatting.remove(p);
                    let q = self.formatting_position(n).expect("bookmark node listed");
                    self.formatting.insert(q + 1, Entry::Element(new_fe, fe_tag));
                }
            }
            let p = self.open.iter().position(|&n| n == fe).expect("on stack");
            self.open.remove(p);
            let q = self
                .open
                .iter()
                .position(|&n| n == furthest_block)
                .expect("on stack");
            self.open.insert(q + 1, new_fe);
        }
        true
    }

    fn any_other_end_tag(&mut self, name: &str) {
        for i in (0..self.open.len()).rev() {
            let node = self.open[i];
            let tag = self.tag_of(node);
            if tag == name {
                self.generate_implied_end_tags(Some(name));
                self.open.truncate(i);
                return;
            }
            if one_of(tag, SPECIAL) {
                return;
            }
        }
    }

    fn reset_insertion_mode(&mut self) {
        for i in (0..self.open.len()).rev() {
            let last = i == 0;
            let node = self.open[i];
            let mode = match self.tag_of(node) {
                "td" | "th" if !last => Some(Mode::InCell),
                "tr" => Some(Mode::InRow),
                "tbody" | "thead" | "tfoot" => Some(Mode::InTableBody),
                "caption" => Some(Mode::InCaption),
                "colgroup" => Some(Mode::InColumnGroup),
                "table" => Some(Mode::InTable),
                "template" => self.template_modes.last().copied(),
                "head" if !last => Some(Mode::InHead),
                "body" => Some(Mode::InBody),
                "frameset" => Some(Mode::InFrameset),
                "html" => Some(if self.head.is_none() {
                    Mode::BeforeHead
                } else {
                    Mode::AfterHead
                }),
                _ if last => Some(Mode::InBody),
                _ => None,
            };
            if let Some(m) = mode {
                self.mode = m;
                return;
            }
        }
        self.mode = Mode::InBody;
    }

    fn add_missing_attrs(&mut self, node: NodeId, tag: &Tag) {
        if let Some(el) = self.doc.element_mut(node) {
            for a in &tag.attrs {
                if !el.has_attr(&a.name) {
                    el.attrs.push(a.clone());
                }
            }
        }
    }

    // ---- insertion modes ------------------------------------------------

    fn initial(&mut self, token: Token) -> Step {
        match token {
            Token::Characters(s) => {
                let (_, rest) = split_ws(&s);
                if rest.is_empty() {
                    return Step::Done;
                }
                self.mode = Mode::BeforeHtml;
                Step::Reprocess(Token::Characters(rest.to_string()))
            }
            Token::Comment(_) => Step::Done,
            Token::Doctype => {
                self.mode = Mode::BeforeHtml;
                Step::Done
            }
            other => {
                self.mode = Mode::BeforeHtml;
                Step::Reprocess(other)
            }
        }
    }

    fn before_html(&mut self, token: Token) -> Step {
        match token {
            Token::Doctype | Token::Comment(_) => Step::Done,
            Token::Characters(s) => {
                let (_, rest) = split_ws(&s);
                if rest.is_empty() {
                    return Step::Done;
                }
                self.open_root(None);
                Step::Reprocess(Token::Characters(rest.to_string()))
            }
            Token::StartTag(t) if t.name == "html" => {
                self.open_root(Some(&t));
                Step::Done
            }
            Token::EndTag(t) if !one_of(&t.name, &["head", "body", "html", "br"]) => Step::Done,
            other => {
                self.open_root(None);
                Step::Reprocess(other)
            }
        }
    }

    fn open_root(&mut self, tag: Option<&Tag>) {
        let root = self.doc.root();
        if let Some(t) = tag {
            self.add_missing_attrs(root, t);
        }
        self.open.push(root);
        self.mode = Mode::BeforeHead;
    }

    fn before_head(&mut self, token: Token) -> Step {
        match token {
            Token::Characters(s) => {
                let (_, rest) = split_ws(&s);
                if rest.is_empty() {
                    return Step::Done;
                }
                self.open_head(&Tag::named("head"));
                Step::Reprocess(Token::Characters(rest.to_string()))
            }
            Token::Comment(c) => {
                self.insert_comment(c);
                Step::Done
            }
            Token::Doctype => Step::Done,
            Token::StartTag(t) if t.name == "html" => self.in_body(Token::StartTag(t)),
            Token::StartTag(t) if t.name == "head" => {
                self.open_head(&t);
                Step::Done
            }
            Token::EndTag(t) if !one_of(&t.name, &["head", "body", "html", "br"]) => Step::Done,
            other => {
                self.open_head(&Tag::named("head"));
                Step::Reprocess(other)
            }
        }
    }

    fn open_head(&mut self, tag: &Tag) {
        let head = self.insert_element(tag);
        self.head = Some(head);
        self.mode = Mode::InHead;
    }

    fn in_head(&mut self, token: Token) -> Step {
        match token {
            Token::Characters(s) => {
                let (ws, rest) = split_ws(&s);
                self.insert_chars(ws);
                if rest.is_empty() {
                    return Step::Done;
                }
                self.open.pop();
                self.mode = Mode::AfterHead;
                Step::Reprocess(Token::Characters(rest.to_string()))
            }
            Token::Comment(c) => {
                self.insert_comment(c);
                Step::Done
            }
            Token::Doctype => Step::Done,
            Token::StartTag(t) => match t.name.as_str() {
                "html" => self.in_body(Token::StartTag(t)),
                "base" | "basefont" | "bgsound" | "link" | "meta" => {
                    self.insert_void(&t);
                    Step::Done
                }
                "title" => {
                    self.generic_text_element(&t, TextMode::RcData);
                    Step::Done
                }
                "noscript" | "noframes" | "style" => {
                    self.generic_text_element(&t, TextMode::RawText);
                    Step::Done
                }
                "script" => {
                    self.generic_text_element(&t, TextMode::ScriptData);
                    Step::Done
                }
                "template" => {
                    self.insert_element(&t);
                    self.formatting.push(Entry::Marker);
                    self.frameset_ok = false;
                    self.mode = Mode::InTemplate;
                    self.template_modes.push(Mode::InTemplate);
                    Step::Done
                }
                "head" => Step::Done,
                _ => {
                    self.open.pop();
                    self.mode = Mode::AfterHead;
                    Step::Reprocess(Token::StartTag(t))
                }
            },
            Token::EndTag(t) => match t.name.as_str() {
                "head" => {
                    self.open.pop();
                    self.mode = Mode::AfterHead;
                    Step::Done
                }
                "template" => {
                    self.end_template();
                    Step::Done
                }
                "body" | "html" | "br" => {
                    self.open.pop();
                    self.mode = Mode::AfterHead;
                    Step::Reprocess(Token::EndTag(t))
                }
                _ => Step::Done,
            },
            Token::Eof => {
                self.open.pop();
                self.mode = Mode::AfterHead;
                Step::Reprocess(Token::Eof)
            }
        }
    }

    fn end_template(&mut self) {
        if !self.open.iter().any(|&n| self.tag_of(n) == "template") {
            return;
        }
        self.generate_implied_end_tags_thoroughly();
        self.pop_until("template");
        self.clear_formatting_to_marker();
        self.template_modes.pop();
        self.reset_insertion_mode();
    }

    fn after_head(&mut self, token: Token) -> Step {
        match token {
            Token::Characters(s) => {
                let (ws, rest) = split_ws(&s);
                self.insert_chars(ws);
                if rest.is_empty() {
                    return Step::Done;
                }
                self.insert_named("body");
                self.mode = Mode::InBody;
                Step::Reprocess(Token::Characters(rest.to_string()))
            }
            Token::Comment(c) => {
                self.insert_comment(c);
                Step::Done
            }
            Token::Doctype => Step::Done,
            Token::StartTag(t) => match t.name.as_str() {
                "html" => self.in_body(Token::StartTag(t)),
                "body" => {
                    self.insert_element(&t);
                    self.frameset_ok = false;
                    self.mode = Mode::InBody;
                    Step::Done
                }
                "frameset" => {
                    self.insert_element(&t);
                    self.mode = Mode::InFrameset;
                    Step::Done
                }
                name if one_of(name, HEAD_CONTENT) => {
                    let Some(head) = self.head else {
                        return Step::Done;
                    };
                    self.open.push(head);
                    let step = self.in_head(Token::StartTag(t));
                    if let Some(p) = self.open.iter().rposition(|&n| n == head) {
                        self.open.remove(p);
                    }
                    step
                }
                "head" => Step::Done,
                _ => {
                    self.insert_named("body");
                    self.mode = Mode::InBody;
                    Step::Reprocess(Token::StartTag(t))
                }
            },
            Token::EndTag(t) => match t.name.as_str() {
                "template" => self.in_head(Token::EndTag(t)),
                "body" | "html" | "br" => {
                    self.insert_named("body");
                    self.mode = Mode::InBody;
                    Step::Reprocess(Token::EndTag(t))
                }
                _ => Step::Done,
            },
            Token::Eof => {
                self.insert_named("body");
                self.mode = Mode::InBody;
                Step::Reprocess(Token::Eof)
            }
        }
    }

    fn in_body(&mut self, token: Token) -> Step {
        match token {
            Token::Characters(s) => {
                let s = s.replace('\0', "");
                if s.is_empty() {
                    return Step::Done;
                }
                self.reconstruct_formatting();
                self.insert_chars(&s);
                if !is_ws_str(&s) {
                    self.frameset_ok = false;
                }
                Step::Done
            }
            Token::Comment(c) => {
                self.insert_comment(c);
                Step::Done
            }
            Token::Doctype => Step::Done,
            Token::StartTag(t) => self.in_body_start(t),
            Token::EndTag(t) => self.in_body_end(t),
            Token::Eof => {
                if !self.template_modes.is_empty() {
                    return self.in_template(Token::Eof);
                }
                Step::Done
            }
        }
    }

    fn in_body_start(&mut self, t: Tag) -> Step {
        let name = t.name.as_str();
        match name {
            "html" => {
                if !self.open.iter().any(|&n| self.tag_of(n) == "template") {
                    let root = self.doc.root();
                    self.add_missing_attrs(root, &t);
                }
            }
            _ if one_of(name, HEAD_CONTENT) => return self.in_head(Token::StartTag(t)),
            "body" => {
                let body_second = self.open.len() >= 2 && self.tag_of(self.open[1]) == "body";
                let in_template = self.open.iter().any(|&n| self.tag_of(n) == "template");
                if body_second && !in_template {
                    self.frameset_ok = false;
                    let body = self.open[1];
                    self.add_missing_attrs(body, &t);
                }
            }
            "frameset" => {
                let body_second = self.open.len() >= 2 && self.tag_of(self.open[1]) == "body";
                if body_second && self.frameset_ok {
                    let body = self.open[1];
                    self.doc.detach(body);
                    self.open.truncate(1);
                    self.insert_element(&t);
                    self.mode = Mode::InFrameset;
                }
            }
            _ if one_of(name, BLOCK_START) => {
                self.close_p_in_button_scope();
                self.insert_element(&t);
            }
            _ if one_of(name, HEADINGS) => {
                self.close_p_in_button_scope();
                if one_of(self.current_tag(), HEADINGS) {
                    self.open.pop();
                }
                self.insert_element(&t);
            }
            "pre" | "listing" => {
                self.close_p_in_button_scope();
                self.insert_element(&t);
                self.ignore_lf = true;
                self.frameset_ok = false;
            }
            "form" => {
                let in_template = self.open.iter().any(|&n| self.tag_of(n) == "template");
                if self.form.is_some() && !in_template {
                    return Step::Done;
                }
                self.close_p_in_button_scope();
                let id = self.insert_element(&t);
                if !in_template {
                    self.form = Some(id);
                }
            }
            "li" | "dd" | "dt" => {
                self.frameset_ok = false;
                let closers: &[&str] = if name == "li" { &["li"] } else { &["dd", "dt"] };
                for i in (0..self.open.len()).rev() {
                    let tag = self.tag_of(self.open[i]).to_string();
                    if one_of(&tag, closers) {
                        self.generate_implied_end_tags(Some(&tag));
                        self.pop_until(&tag);
                        break;
                    }
                    if one_of(&tag, SPECIAL) && !one_of(&tag, &["address", "div", "p"]) {
                        break;
                    }
                }
                self.close_p_in_button_scope();
                self.insert_element(&t);
            }
            "plaintext" => {
                self.close_p_in_button_scope();
                self.insert_element(&t);
                self.switch_tokenizer(TextMode::PlainText, "plaintext");
            }
            "button" => {
                if self.in_scope("button", Scope::Default) {
                    self.generate_implied_end_tags(None);
                    self.pop_until("button");
                }
                self.reconstruct_formatting();
                self.insert_element(&t);
                self.frameset_ok = false;
            }
            "a" => {
                let existing = self.formatting.iter().rev().find_map(|e| match e {
                    Entry::Marker => Some(None),
                    Entry::Element(id, tag) if tag.name == "a" => Some(Some(*id)),
                    Entry::Element(..) => None,
                });
                if let Some(Some(a)) = existing {
                    if !self.adoption_agency("a") {
                        self.any_other_end_tag("a");
                    }
                    if let Some(p) = self.formatting_position(a) {
                        self.formatting.remove(p);
                    }
                    if let Some(p) = self.open.iter().position(|&n| n == a) {
                        self.open.remove(p);
                    }
                }
                self.reconstruct_formatting();
                let id = self.insert_element(&t);
                self.push_formatting(id, &t);
            }
            "nobr" => {
                self.reconstruct_formatting();
                if self.in_scope("nobr", Scope::Default) {
                    if !self.adoption_agency("nobr") {
                        self.any_other_end_tag("nobr");
                    }
                    self.reconstruct_formatting();
                }
                let id = self.insert_element(&t);
                self.push_formatting(id, &t);
            }
            _ if one_of(name, FORMATTING) => {
                self.reconstruct_formatting();
                let id = self.insert_element(&t);
                self.push_formatting(id, &t);
            }
            "applet" | "marquee" | "object" => {
                self.reconstruct_formatting();
                self.insert_element(&t);
                self.formatting.push(Entry::Marker);
                self.frameset_ok = false;
            }
            "table" => {
                self.close_p_in_button_scope();
                self.insert_element(&t);
                self.frameset_ok = false;
                self.mode = Mode::InTable;
            }
            "area" | "br" | "embed" | "img" | "keygen" | "wbr" => {
                self.reconstruct_formatting();
                self.insert_void(&t);
                self.frameset_ok = false;
            }
            "input" => {
                if self.in_scope("select", Scope::Default) {
                    self.pop_until("select");
                }
                self.reconstruct_formatting();
                self.insert_void(&t);
                if !t
                    .attr("type")
                    .is_some_and(|v| v.eq_ignore_ascii_case("hidden"))
                {
                    self.frameset_ok = false;
                }
            }
            "param" | "source" | "track" => self.insert_void(&t),
            "hr" => {
                self.close_p_in_button_scope();
                if self.in_scope("select", Scope::Default) {
                    self.generate_implied_end_tags(None);
                }
                self.insert_void(&t);
                self.frameset_ok = false;
            }
            "image" => {
                let mut t = t;
                t.name = "img".into();
                return Step::Reprocess(Token::StartTag(t));
            }
            "textarea" => {
                self.insert_element(&t);
                self.ignore_lf = true;
                self.switch_tokenizer(TextMode::RcData, "textarea");
                self.original_mode = self.mode;
                self.frameset_ok = false;
                self.mode = Mode::Text;
            }
            "xmp" => {
                self.close_p_in_button_scope();
                self.reconstruct_formatting();
                self.frameset_ok = false;
                self.generic_text_element(&t, TextMode::RawText);
            }
            "iframe" => {
                self.frameset_ok = false;
                self.generic_text_element(&t, TextMode::RawText);
            }
            "noembed" | "noscript" => self.generic_text_element(&t, TextMode::RawText),
            "select" => {
                if self.in_scope("select", Scope::Default) {
                    self.pop_until("select");
                } else {
                    self.reconstruct_formatting();
                    self.insert_element(&t);
                    self.frameset_ok = false;
                }
            }
            "option" | "optgroup" => {
                if self.in_scope("select", Scope::Default) {
                    let keep = (t.name == "option").then_some("optgroup");
                    self.generate_implied_end_tags(keep);
                } else if self.current_tag() == "option" {
                    self.open.pop();
                }
                self.reconstruct_formatting();
                self.insert_element(&t);
            }
            "rb" | "rtc" => {
                if self.in_scope("ruby", Scope::Default) {
                    self.generate_implied_end_tags(None);
                }
                self.insert_element(&t);
            }
            "rp" | "rt" => {
                if self.in_scope("ruby", Scope::Default) {
                    self.generate_implied_end_tags(Some("rtc"));
                }
                self.insert_element(&t);
            }
            "math" | "svg" => {
                self.reconstruct_formatting();
                self.insert_element(&t);
                if t.self_closing {
                    self.open.pop();
                }
            }
            "caption" | "col" | "colgroup" | "frame" | "head" | "tbody" | "td" | "tfoot"
            | "th" | "thead" | "tr" => {}
            _ => {
                self.reconstruct_formatting();
                self.insert_element(&t);
                if t.self_closing && self.in_foreign() {
                    self.open.pop();
                }
            }
        }
        Step::Done
    }

    fn in_body_end(&mut self, t: Tag) -> Step {
        let name = t.name.as_str();
        match name {
            "template" => return self.in_head(Token::EndTag(t)),
            "body" => {
                if self.in_scope("body", Scope::Default) {
                    self.mode = Mode::AfterBody;
                }
            }
            "html" => {
                if self.in_scope("body", Scope::Default) {
                    self.mode = Mode::AfterBody;
                    return Step::Reprocess(Token::EndTag(t));
                }
            }
            _ if one_of(name, BLOCK_END) => {
                if self.in_scope(name, Scope::Default) {
                    self.generate_implied_end_tags(None);
                    self.pop_until(name);
                }
            }
            "form" => {
                let in_template = self.open.iter().any(|&n| self.tag_of(n) == "template");
                if in_template {
                    if self.in_scope("form", Scope::Default) {
                        self.generate_implied_end_tags(None);
                        self.pop_until("form");
                    }
                } else {
                    let node = self.form.take();
                    match node {
                        Some(node) if self.node_in_scope(node) => {
                            self.generate_implied_end_tags(None);
                            if let Some(p) = self.open.iter().position(|&n| n == node) {
                                self.open.remove(p);
                            }
                        }
                        _ => {}
                    }
                }
            }
            "p" => {
                if !self.in_scope("p", Scope::Button) {
                    self.insert_named("p");
                }
                self.close_p();
            }
            "li" => {
                if self.in_scope("li", Scope::ListItem) {
                    self.generate_implied_end_tags(Some("li"));
                    self.pop_until("li");
                }
            }
            "dd" | "dt" => {
                if self.in_scope(name, Scope::Default) {
                    self.generate_implied_end_tags(Some(name));
                    self.pop_until(name);
                }
            }
            _ if one_of(name, HEADINGS) => {
                if self.in_scope_where(|t| one_of(t, HEADINGS), Scope::Default) {
                    self.generate_implied_end_tags(None);
                    self.pop_until_any(HEADINGS);
                }
            }
            _ if one_of(name, FORMATTING) => {
                if !self.adoption_agency(name) {
                    self.any_other_end_tag(name);
                }
            }
            "applet" | "marquee" | "object" => {
                if self.in_scope(name, Scope::Default) {
                    self.generate_implied_end_tags(None);
                    self.pop_until(name);
                    self.clear_formatting_to_marker();
                }
            }
            "br" => return self.in_body_start(Tag::named("br")),
            _ => self.any_other_end_tag(name),
        }
        Step::Done
    }

    fn text(&mut self, token: Token) -> Step {
        match token {
            Token::Characters(s) => {
                self.insert_chars(&s);
                Step::Done
            }
            Token::Eof => {
                self.open.pop();
                self.mode = self.original_mode;
                Step::Reprocess(Token::Eof)
            }
            Token::EndTag(_) => {
                self.open.pop();
                self.mode = self.original_mode;
                Step::Done
            }
            _ => Step::Done,
        }
    }

    fn in_table(&mut self, token: Token) -> Step {
        match token {
            Token::Characters(s)
                if one_of(
                    self.current_tag(),
                    &["table", "tbody", "template", "tfoot", "thead", "tr"],
                ) =>
            {
                self.pending_table_text.clear();
                self.original_mode = self.mode;
                self.mode = Mode::InTableText;
                Step::Reprocess(Token::Characters(s))
            }
            Token::Comment(c) => {
                self.insert_comment(c);
                Step::Done
            }
            Token::Doctype => Step::Done,
            Token::StartTag(t) => match t.name.as_str() {
                "caption" => {
                    self.clear_stack_back_to(&["table", "template", "html"]);
                    self.formatting.push(Entry::Marker);
                    self.insert_element(&t);
                    self.mode = Mode::InCaption;
                    Step::Done
                }
                "colgroup" => {
                    self.clear_stack_back_to(&["table", "template", "html"]);
                    self.insert_element(&t);
                    self.mode = Mode::InColumnGroup;
                    Step::Done
                }
                "col" => {
                    self.clear_stack_back_to(&["table", "template", "html"]);
                    self.insert_named("colgroup");
                    self.mode = Mode::InColumnGroup;
                    Step::Reprocess(Token::StartTag(t))
                }
                "tbody" | "tfoot" | "thead" => {
                    self.clear_stack_back_to(&["table", "template", "html"]);
                    self.insert_element(&t);
                    self.mode = Mode::InTableBody;
                    Step::Done
                }
                "td" | "th" | "tr" => {
                    self.clear_stack_back_to(&["table", "template", "html"]);
                    self.insert_named("tbody");
                    self.mode = Mode::InTableBody;
                    Step::Reprocess(Token::StartTag(t))
                }
                "table" => {
                    if !self.in_scope("table", Scope::Table) {
                        return Step::Done;
                    }
                    self.pop_until("table");
                    self.reset_insertion_mode();
                    Step::Reprocess(Token::StartTag(t))
                }
                "style" | "script" | "template" => self.in_head(Token::StartTag(t)),
                "input"
                    if t
                        .attr("type")
                        .is_some_and(|v| v.eq_ignore_ascii_case("hidden")) =>
                {
                    self.insert_void(&t);
                    Step::Done
                }
                "form" => {
                    let in_template = self.open.iter().any(|&n| self.tag_of(n) == "template");
                    if self.form.is_some() || in_template {
                        return Step::Done;
                    }
                    let id = self.insert_element(&t);
                    self.form = Some(id);
                    self.open.pop();
                    Step::Done
                }
                _ => self.foster(Token::StartTag(t)),
            },
            Token::EndTag(t) => match t.name.as_str() {
                "table" => {
                    if self.in_scope("table", Scope::Table) {
                        self.pop_until("table");
                        self.reset_insertion_mode();
                    }
                    Step::Done
                }
                "body" | "caption" | "col" | "colgroup" | "html" | "tbody" | "td" | "tfoot"
                | "th" | "thead" | "tr" => Step::Done,
                "template" => self.in_head(Token::EndTag(t)),
                _ => self.foster(Token::EndTag(t)),
            },
            Token::Eof => self.in_body(Token::Eof),
            other => self.foster(other),
        }
    }

    fn foster(&mut self, token: Token) -> Step {
        self.foster_parenting = true;
        let step = self.in_body(token);
        self.foster_parenting = false;
        step
    }

    fn in_table_text(&mut self, token: Token) -> Step {
        match token {
            Token::Characters(s) => {
                let s = s.replace('\0', "");
                if !s.is_empty() {
                    self.pending_table_text.push(s);
                }
                Step::Done
            }
            other => {
                let pending = std::mem::take(&mut self.pending_table_text);
                if pending.iter().any(|s| !is_ws_str(s)) {
                    for s in pending {
                        self.foster_parenting = true;
                        self.reconstruct_formatting();
                        self.insert_chars(&s);
                        self.foster_parenting = false;
                    }
                    self.frameset_ok = false;
                } else {
                    for s in pending {
                        self.insert_chars(&s);
                    }
                }
                self.mode = self.original_mode;
                Step::Reprocess(other)
            }
        }
    }

    fn close_caption(&mut self) -> bool {
        if !self.in_scope("caption", Scope::Table) {
            return false;
        }
        self.generate_implied_end_tags(None);
        self.pop_until("caption");
        self.clear_formatting_to_marker();
        self.mode = Mode::InTable;
        true
    }

    fn in_caption(&mut self, token: Token) -> Step {
        match token {
            Token::EndTag(t) if t.name == "caption" => {
                self.close_caption();
                Step::Done
            }
            Token::StartTag(t)
                if one_of(
                    &t.name,
                    &["caption", "col", "colgroup", "tbody", "td", "tfoot", "th", "thead", "tr"],
                ) =>
            {
                if self.close_caption() {
                    Step::Reprocess(Token::StartTag(t))
                } else {
                    Step::Done
                }
            }
            Token::EndTag(t) if t.name == "table" => {
                if self.close_caption() {
                    Step::Reprocess(Token::EndTag(t))
                } else {
                    Step::Done
                }
            }
            Token::EndTag(t)
                if one_of(
                    &t.name,
                    &["body", "col", "colgroup", "html", "tbody", "td", "tfoot", "th", "thead", "tr"],
                ) =>
            {
                Step::Done
            }
            other => self.in_body(other),
        }
    }

    fn in_column_group(&mut self, token: Token) -> Step {
        match token {
            Token::Characters(s) => {
                let (ws, rest) = split_ws(&s);
                self.insert_chars(ws);
                if rest.is_empty() {
                    return Step::Done;
                }
                self.column_group_anything_else(Token::Characters(rest.to_string()))
            }
            Token::Comment(c) => {
                self.insert_comment(c);
                Step::Done
            }
            Token::Doctype => Step::Done,
            Token::StartTag(t) if t.name == "html" => self.in_body(Token::StartTag(t)),
            Token::StartTag(t) if t.name == "col" => {
                self.insert_void(&t);
                Step::Done
            }
            Token::EndTag(t) if t.name == "colgroup" => {
                if self.current_tag() == "colgroup" {
                    self.open.pop();
                    self.mode = Mode::InTable;
                }
                Step::Done
            }
            Token::EndTag(t) if t.name == "col" => Step::Done,
            Token::StartTag(t) if t.name == "template" => self.in_head(Token::StartTag(t)),
            Token::EndTag(t) if t.name == "template" => self.in_head(Token::EndTag(t)),
            Token::Eof => self.in_body(Token::Eof),
            other => self.column_group_anything_else(other),
        }
    }

    fn column_group_anything_else(&mut self, token: Token) -> Step {
        if self.current_tag() != "colgroup" {
            return Step::Done;
        }
        self.open.pop();
        self.mode = Mode::InTable;
        Step::Reprocess(token)
    }

    fn in_table_body(&mut self, token: Token) -> Step {
        const CONTEXT: &[&str] = &["tbody", "tfoot", "thead", "template", "html"];
        match token {
            Token::StartTag(t) if t.name == "tr" => {
                self.clear_stack_back_to(CONTEXT);
                self.insert_element(&t);
                self.mode = Mode::InRow;
                Step::Done
            }
            Token::StartTag(t) if t.name == "th" || t.name == "td" => {
                self.clear_stack_back_to(CONTEXT);
                self.insert_named("tr");
                self.mode = Mode::InRow;
                Step::Reprocess(Token::StartTag(t))
            }
            Token::EndTag(t) if one_of(&t.name, &["tbody", "tfoot", "thead"]) => {
                if self.in_scope(&t.name, Scope::Table) {
                    self.clear_stack_back_to(CONTEXT);
                    self.open.pop();
                    self.mode = Mode::InTable;
                }
                Step::Done
            }
            Token::StartTag(ref t)
                if one_of(&t.name, &["caption", "col", "colgroup", "tbody", "tfoot", "thead"]) =>
            {
                self.leave_table_body(token)
            }
            Token::EndTag(ref t) if t.name == "table" => self.leave_table_body(token),
            Token::EndTag(t)
                if one_of(
                    &t.name,
                    &["body", "caption", "col", "colgroup", "html", "td", "th", "tr"],
                ) =>
            {
                Step::Done
            }
            other => self.in_table(other),
        }
    }

    fn leave_table_body(&mut self, token: Token) -> Step {
        if !self.in_scope_where(|t| one_of(t, &["tbody", "thead", "tfoot"]), Scope::Table) {
            return Step::Done;
        }
        self.clear_stack_back_to(&["tbody", "tfoot", "thead", "template", "html"]);
        self.open.pop();
        self.mode = Mode::InTable;
        Step::Reprocess(token)
    }

    fn close_row(&mut self) -> bool {
        if !self.in_scope("tr", Scope::Table) {
            return false;
        }
        self.clear_stack_back_to(&["tr", "template", "html"]);
        self.open.pop();
        self.mode = Mode::InTableBody;
        true
    }

    fn in_row(&mut self, token: Token) -> Step {
        match token {
            Token::StartTag(t) if t.name == "th" || t.name == "td" => {
                self.clear_stack_back_to(&["tr", "template", "html"]);
                self.insert_element(&t);
                self.mode = Mode::InCell;
                self.formatting.push(Entry::Marker);
                Step::Done
            }
            Token::EndTag(t) if t.name == "tr" => {
                self.close_row();
                Step::Done
            }
            Token::StartTag(ref t)
                if one_of(
                    &t.name,
                    &["caption", "col", "colgroup", "tbody", "tfoot", "thead", "tr"],
                ) =>
            {
                if self.close_row() {
                    Step::Reprocess(token)
                } else {
                    Step::Done
                }
            }
            Token::EndTag(ref t) if t.name == "table" => {
                if self.close_row() {
                    Step::Reprocess(token)
                } else {
                    Step::Done
                }
            }
            Token::EndTag(ref t) if one_of(&t.name, &["tbody", "tfoot", "thead"]) => {
                if !self.in_scope(&t.name, Scope::Table) {
                    return Step::Done;
                }
                if self.close_row() {
                    Step::Reprocess(token)
                } else {
                    Step::Done
                }
            }
            Token::EndTag(t)
                if one_of(&t.name, &["body", "caption", "col", "colgroup", "html", "td", "th"]) =>
            {
                Step::Done
            }
            other => self.in_table(other),
        }
    }

    fn close_cell(&mut self) {
        self.generate_implied_end_tags(None);
        self.pop_until_any(&["td", "th"]);
        self.clear_formatting_to_marker();
        self.mode = Mode::InRow;
    }

    fn in_cell(&mut self, token: Token) -> Step {
        match token {
            Token::EndTag(t) if t.name == "td" || t.name == "th" => {
                if self.in_scope(&t.name, Scope::Table) {
                    self.generate_implied_end_tags(None);
                    self.pop_until(&t.name);
                    self.clear_formatting_to_marker();
                    self.mode = Mode::InRow;
                }
                Step::Done
            }
            Token::StartTag(ref t)
                if one_of(
                    &t.name,
                    &["caption", "col", "colgroup", "tbody", "td", "tfoot", "th", "thead", "tr"],
                ) =>
            {
                if !self.in_scope_where(|n| n == "td" || n == "th", Scope::Table) {
                    return Step::Done;
                }
                self.close_cell();
                Step::Reprocess(token)
            }
            Token::EndTag(t) if one_of(&t.name, &["body", "caption", "col", "colgroup", "html"]) => {
                Step::Done
            }
            Token::EndTag(ref t)
                if one_of(&t.name, &["table", "tbody", "tfoot", "thead", "tr"]) =>
            {
                if !self.in_scope(&t.name, Scope::Table) {
                    return Step::Done;
                }
                self.close_cell();
                Step::Reprocess(token)
            }
            other => self.in_body(other),
        }
    }

    fn in_template(&mut self, token: Token) -> Step {
        match token {
            Token::Characters(_) | Token::Comment(_) | Token::Doctype => self.in_body(token),
            Token::StartTag(ref t) if one_of(&t.name, HEAD_CONTENT) => self.in_head(token),
            Token::EndTag(ref t) if t.name == "template" => self.in_head(token),
            Token::StartTag(ref t) => {
                let next = match t.name.as_str() {
                    "caption" | "colgroup" | "tbody" | "tfoot" | "thead" => Mode::InTable,
                    "col" => Mode::InColumnGroup,
                    "tr" => Mode::InTableBody,
                    "td" | "th" => Mode::InRow,
                    _ => Mode::InBody,
                };
                self.template_modes.pop();
                self.template_modes.push(next);
                self.mode = next;
                Step::Reprocess(token)
            }
            Token::EndTag(_) => Step::Done,
            Token::Eof => {
                if !self.open.iter().any(|&n| self.tag_of(n) == "template") {
                    return Step::Done;
                }
                self.pop_until("template");
                self.clear_formatting_to_marker();
                self.template_modes.pop();
                self.reset_insertion_mode();
                Step::Reprocess(Token::Eof)
            }
        }
    }

    fn after_body(&mut self, token: Token) -> Step {
        match token {
            Token::Characters(ref s) if is_ws_str(s) => self.in_body(token),
            Token::Comment(c) => {
                let root = self.doc.root();
                let id = self.doc.create_comment(c);
                self.doc.append(root, id);
                Step::Done
            }
            Token::Doctype => Step::Done,
            Token::StartTag(ref t) if t.name == "html" => self.in_body(token),
            Token::EndTag(ref t) if t.name == "html" => {
                self.mode = Mode::AfterAfterBody;
                Step::Done
            }
            Token::Eof => Step::Done,
            other => {
                self.mode = Mode::InBody;
                Step::Reprocess(other)
            }
        }
    }

    fn in_frameset(&mut self, token: Token) -> Step {
        match token {
            Token::Characters(s) => {
                let ws: String = s
                    .chars()
                    .filter(|c| matches!(c, '\t' | '\n' | '\x0C' | '\r' | ' '))
                    .collect();
                self.insert_chars(&ws);
                Step::Done
            }
            Token::Comment(c) => {
                self.insert_comment(c);
                Step::Done
            }
            Token::StartTag(t) => match t.name.as_str() {
                "html" => self.in_body(Token::StartTag(t)),
                "frameset" => {
                    self.insert_element(&t);
                    Step::Done
                }
                "frame" => {
                    self.insert_void(&t);
                    Step::Done
                }
                "noframes" => self.in_head(Token::StartTag(t)),
                _ => Step::Done,
            },
            Token::EndTag(t) if t.name == "frameset" => {
                if self.current_tag() != "html" {
                    self.open.pop();
                    if self.current_tag() != "frameset" {
                        self.mode = Mode::AfterFrameset;
                    }
                }
                Step::Done
            }
            _ => Step::Done,
        }
    }

    fn after_frameset(&mut self, token: Token) -> Step {
        match token {
            Token::Characters(s) => {
                let ws: String = s
                    .chars()
                    .filter(|c| matches!(c, '\t' | '\n' | '\x0C' | '\r' | ' '))
                    .collect();
                self.insert_chars(&ws);
                Step::Done
            }
            Token::Comment(c) => {
                self.insert_comment(c);
                Step::Done
            }
            Token::StartTag(ref t) if t.name == "html" => self.in_body(token),
            Token::StartTag(ref t) if t.name == "noframes" => self.in_head(token),
            Token::EndTag(ref t) if t.name == "html" => {
                self.mode = Mode::AfterAfterFrameset;
                Step::Done
            }
            _ => Step::Done,
        }
    }

    fn after_after_body(&mut self, token: Token) -> Step {
        match token {
            Token::Comment(_) => Step::Done,
            Token::Doctype | Token::Eof => Step::Done,
            Token::Characters(ref s) if is_ws_str(s) => self.in_body(token),
            Token::StartTag(ref t) if t.name == "html" => self.in_body(token),
            other => {
                self.mode = Mode::InBody;
                Step::Reprocess(other)
            }
        }
    }

    fn after_after_frameset(&mut self, token: Token) -> Step {
        match token {
            Token::Characters(ref s) if is_ws_str(s) => self.in_body(token),
            Token::StartTag(ref t) if t.name == "html" => self.in_body(token),
            Token::StartTag(ref t) if t.name == "noframes" => self.in_head(token),
            _ => Step::Done,
        }
    }
}

fn same_attrs(a: &Tag, b: &Tag) -> bool {
    a.attrs.len() == b.attrs.len()
        && a.attrs
            .iter()
            .all(|x| b.attrs.iter().any(|y| y.name == x.name && y.value == x.value))
}

fn is_scope_boundary(tag: &str, scope: Scope) -> bool {
    const DEFAULT: &[&str] = &[
        "applet", "caption", "html", "table", "td", "th", "marquee", "object", "select",
        "template", "foreignobject",
    ];
    match scope {
        Scope::Default => one_of(tag, DEFAULT),
        Scope::ListItem => one_of(tag, DEFAULT) || tag == "ol" || tag == "ul",
        Scope::Button => one_of(tag, DEFAULT) || tag == "button",
        Scope::Table => matches!(tag, "html" | "table" | "template"),
    }
}
