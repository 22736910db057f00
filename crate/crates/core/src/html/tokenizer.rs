//! Pull tokenizer following the HTML tokenization rules closely enough for
//! real-world recovery: raw text elements, character references, bogus
//! comments and unterminated tags.

use super::entities::decode_reference;
use super::Attribute;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Tag {
    pub name: String,
    pub attrs: Vec<Attribute>,
    pub self_closing: bool,
}

impl Tag {
    pub fn named(name: &str) -> Self {
        Tag {
            name: name.to_string(),
            attrs: Vec::new(),
            self_closing: false,
        }
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.value.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Token {
    Doctype,
    StartTag(Tag),
    EndTag(Tag),
    Comment(String),
    Characters(String),
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TextMode {
    Data,
    RcData,
    RawText,
    ScriptData,
    PlainText,
}

pub(crate) struct Tokenizer<'a> {
    input: &'a str,
    pos: usize,
    mode: TextMode,
    /// Name of the element whose end tag terminates the current raw text run.
    end_tag: String,
}

fn is_ws(b: u8) -> bool {
    matches!(b, b'\t' | b'\n' | 0x0C | b'\r' | b' ')
}

impl<'a> Tokenizer<'a> {
    pub fn new(input: &'a str) -> Self {
        Tokenizer {
            input,
            pos: 0,
            mode: TextMode::Data,
            end_tag: String::new(),
        }
    }

    pub fn switch_to(&mut self, mode: TextMode, end_tag: &str) {
        self.mode = mode;
        self.end_tag = end_tag.to_string();
    }

    fn rest(&self) -> &'a str {
        &self.input[self.pos..]
    }

    fn peek(&self) -> Option<u8> {
        self.input.as_bytes().get(self.pos).copied()
    }

    pub fn next_token(&mut self) -> Token {
        loop {
            if self.pos >= self.input.len() {
                return Token::Eof;
            }
            let token = match self.mode {
                TextMode::Data => self.data(),
                TextMode::PlainText => {
                    let text = self.rest().replace('\0', "\u{FFFD}");
                    self.pos = self.input.len();
                    Some(Token::Characters(text))
                }
                TextMode::RcData => self.raw_run(true),
                TextMode::RawText | TextMode::ScriptData => self.raw_run(false),
            };
            if let Some(t) = token {
                return t;
            }
        }
    }

    /// Text up to the appropriate end tag for the current raw text element.
    fn raw_run(&mut self, decode_refs: bool) -> Option<Token> {
        let rest = self.rest();
        let bytes = rest.as_bytes();
        let mut search = 0;
        let end = loop {
            match rest[search..].find("</") {
                None => break rest.len(),
                Some(off) => {
                    let at = search + off;
                    let name_start = at + 2;
                    let name_end = name_start + self.end_tag.len();
                    let matches_name = bytes.len() >= name_end
                        && bytes[name_start..name_end].eq_ignore_ascii_case(self.end_tag.as_bytes());
                    let terminated = matches_name
                        && bytes
                            .get(name_end)
                            .is_some_and(|&b| is_ws(b) || b == b'/' || b == b'>');
                    if terminated {
                        break at;
                    }
                    search = at + 2;
                }
            }
        };
        if end == 0 {
            // At the end tag itself: tokenize it in the data state.
            self.mode = TextMode::Data;
            return None;
        }
        let raw = &rest[..end];
        self.pos += end;
        if end < rest.len() {
            self.mode = TextMode::Data;
        }
        let text = if decode_refs {
            decode_text(raw, false)
        } else {
            raw.replace('\0', "\u{FFFD}")
        };
        Some(Token::Characters(text))
    }

    fn data(&mut self) -> Option<Token> {
        let rest = self.rest();
        if rest.starts_with('<') {
            return self.markup();
        }
        let end = rest.find('<').unwrap_or(rest.len());
        self.pos += end;
        let text = decode_text(&rest[..end], false).replace('\0', "");
        if text.is_empty() {
            None
        } else {
            Some(Token::Characters(text))
        }
    }

    /// Called with `pos` on a `<`.
    fn markup(&mut self) -> Option<Token> {
        let rest = self.rest();
        let next = rest.as_bytes().get(1).copied();
        match next {
            Some(c) if c.is_ascii_alphabetic() => {
                self.pos += 1;
                self.tag(false)
            }
            Some(b'/') => {
                match rest.as_bytes().get(2).copied() {
                    Some(c) if c.is_ascii_alphabetic() => {
                        self.pos += 2;
                        self.tag(true)
                    }
                    Some(b'>') => {
                        self.pos += 3;
                        None
                    }
                    None => {
                        self.pos += 2;
                        Some(Token::Characters("</".into()))
                    }
                    Some(_) => {
                        self.pos += 2;
                        Some(self.bogus_comment())
                    }
                }
            }
            Some(b'!') => {
                self.pos += 2;
                Some(self.markup_declaration())
            }
            Some(b'?') => {
                self.pos += 1;
                Some(self.bogus_comment())
            }
            _ => {
                self.pos += 1;
                Some(Token::Characters("<".into()))
            }
        }
    }

    fn bogus_comment(&mut self) -> Token {
        let rest = self.rest();
        let end = rest.find('>').unwrap_or(rest.len());
        let text = rest[..end].replace('\0', "\u{FFFD}");
        self.pos += (end + 1).min(rest.len());
        Token::Comment(text)
    }

    /// Called just after `<!`.
    fn markup_declaration(&mut self) -> Token {
        let rest = self.rest();
        if let Some(body) = rest.strip_prefix("--") {
            self.pos += 2;
            if body.starts_with('>') {
                self.pos += 1;
                return Token::Comment(String::new());
            }
            if body.starts_with("->") {
                self.pos += 2;
                return Token::Comment(String::new());
            }
            let close = [body.find("-->").map(|i| (i, 3)), body.find("--!>").map(|i| (i, 4))]
                .into_iter()
                .flatten()
                .min_by_key(|&(i, _)| i);
            return match close {
                Some((i, len)) => {
                    self.pos += i + len;
                    Token::Comment(body[..i].replace('\0', "\u{FFFD}"))
                }
                None => {
                    self.pos = self.input.len();
                    let trimmed = body.trim_end_matches('-');
                    Token::Comment(trimmed.replace('\0', "\u{FFFD}"))
                }
            };
        }
        if rest.len() >= 7 && rest[..7].eq_ignore_ascii_case("doctype") {
            let end = rest.find('>').map_or(rest.len(), |i| i + 1);
            self.pos += end;
            return Token::Doctype;
        }
        self.bogus_comment()
    }

    /// Called with `pos` on the first letter of the tag name.
    fn tag(&mut self, end: bool) -> Option<Token> {
        let bytes = self.input.as_bytes();
        let start = self.pos;
        while self.pos < bytes.len() && !is_ws(bytes[self.pos]) && !matches!(bytes[self.pos], b'/' | b'>') {
            self.pos += 1;
        }
        let name = lower(&self.input[start..self.pos]);
        let mut tag = Tag {
            name,
            attrs: Vec::new(),
            self_closing: false,
        };
        loop {
            self.skip_ws();
            let Some(c) = self.peek() else {
                // EOF inside a tag drops the tag.
                return Some(Token::Eof);
            };
            match c {
                b'>' => {
                    self.pos += 1;
                    break;
                }
                b'/' => {
                    self.pos += 1;
                    if self.peek() == Some(b'>') {
                        self.pos += 1;
                        tag.self_closing = true;
                        break;
                    }
                }
                _ => {
                    if !self.attribute(&mut tag) {
                        return Some(Token::Eof);
                    }
                }
            }
        }
        if end {
            tag.attrs.clear();
            tag.self_closing = false;
            Some(Token::EndTag(tag))
        } else {
            Some(Token::StartTag(tag))
        }
    }

    fn skip_ws(&mut self) {
        let bytes = self.input.as_bytes();
        while self.pos < bytes.len() && is_ws(bytes[self.pos]) {
            self.pos += 1;
        }
    }

    /// Parses one attribute. Returns false on EOF.
    fn attribute(&mut self, tag: &mut Tag) -> bool {
        let bytes = self.input.as_bytes();
        let start = self.pos;
        // A leading '=' is part of the name.
        self.pos += self.rest().chars().next().map_or(1, char::len_utf8);
        while self.pos < bytes.len()
            && !is_ws(bytes[self.pos])
            && !matches!(bytes[self.pos], b'/' | b'>' | b'=')
        {
            self.pos += 1;
        }
        let name = lower(&self.input[start..self.pos]).replace('\0', "\u{FFFD}");
        self.skip_ws();
        let mut value = String::new();
        if self.peek() == Some(b'=') {
            self.pos += 1;
            self.skip_ws();
            match self.peek() {
                None => return false,
                Some(q @ (b'"' | b'\'')) => {
                    self.pos += 1;
                    let rest = self.rest();
                    let Some(close) = rest.find(q as char) else {
                        return false;
                    };
                    value = decode_text(&rest[..close], true);
                    self.pos += close + 1;
                }
                Some(b'>') => {}
                Some(_) => {
                    let vstart = self.pos;
                    while self.pos < bytes.len() && !is_ws(bytes[self.pos]) && bytes[self.pos] != b'>' {
                        self.pos += 1;
                    }
                    value = decode_text(&self.input[vstart..self.pos], true);
                }
            }
        } else if self.pos >= bytes.len() {
            return false;
        }
        if !tag.attrs.iter().any(|a| a.name == name) {
            tag.attrs.push(Attribute {
                name,
                value: value.replace('\0', "\u{FFFD}"),
            });
        }
        true
    }
}

fn lower(s: &str) -> String {
    let mut out = s.to_ascii_lowercase();
    if out.contains('\0') {
        out = out.replace('\0', "\u{FFFD}");
    }
    out
}

/// Decodes character references in a text or attribute run.
fn decode_text(raw: &str, in_attribute: bool) -> String {
    if !raw.contains('&') {
        return raw.to_string();
    }
    let mut out = String::with_capacity(raw.len());
    let mut rest = raw;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let after = &rest[amp + 1..];
        match decode_reference(after, in_attribute) {
            Some((text, used)) => {
                out.push_str(&text);
                rest = &after[used..];
            }
            None => {
                out.push('&');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Normalizes CR and CRLF to LF.
pub(crate) fn normalize_newlines(input: &str) -> std::borrow::Cow<'_, str> {
    if input.contains('\r') {
        std::borrow::Cow::Owned(input.replace("\r\n", "\n").replace('\r', "\n"))
    } else {
        std::borrow::Cow::Borrowed(input)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tokens(input: &str) -> Vec<Token> {
        let mut t = Tokenizer::new(input);
        let mut out = Vec::new();
        loop {
            let tok = t.next_token();
            if tok == Token::Eof {
                break;
            }
            if let Token::StartTag(tag) = &tok {
                if matches!(tag.name.as_str(), "style" | "script" | "title") {
                    let mode = if tag.name == "title" {
                        TextMode::RcData
                    } else {
                        TextMode::RawText
                    };
                    t.switch_to(mode, &tag.name);
                }
            }
            out.push(tok);
        }
        out
    }

    fn start(name: &str, attrs: &[(&str, &str)]) -> Token {
        Token::StartTag(Tag {
            name: name.into(),
            attrs: attrs
                .iter()
                .map(|(n, v)| Attribute {
                    name: (*n).into(),
                    value: (*v).into(),
                })
                .collect(),
            self_closing: false,
        })
    }

    fn end(name: &str) -> Token {
        Token::EndTag(Tag::named(name))
    }

    fn chars(s: &str) -> Token {
        Token::Characters(s.into())
    }

    #[test]
    fn attributes_in_all_quoting_styles() {
        assert_eq!(
            tokens(r#"<A HREF="x" title='a b' data-x=1 checked>"#),
            vec![start("a", &[("href", "x"), ("title", "a b"), ("data-x", "1"), ("checked", "")])]
        );
    }

    #[test]
    fn duplicate_attribute_first_wins() {
        assert_eq!(
            tokens(r#"<p class=a class=b>"#),
            vec![start("p", &[("class", "a")])]
        );
    }

    #[test]
    fn raw_text_ignores_markup() {
        assert_eq!(
            tokens("<style>p > a { x: '</b>' }</STYLE >x"),
            vec![
                start("style", &[]),
                chars("p > a { x: '</b>' }"),
                end("style"),
                chars("x")
            ]
        );
    }

    #[test]
    fn rcdata_decodes_references() {
        assert_eq!(
            tokens("<title>a &amp; <b></title>"),
            vec![start("title", &[]), chars("a & <b>"), end("title")]
        );
    }

    #[test]
    fn comments_and_bogus_comments() {
        assert_eq!(
            tokens("<!-- c --><!--><?xml x?></ y><!x>"),
            vec![
                Token::Comment(" c ".into()),
                Token::Comment("".into()),
                Token::Comment("?xml x?".into()),
                Token::Comment(" y".into()),
                Token::Comment("x".into()),
            ]
        );
    }

    #[test]
    fn stray_angle_brackets_are_text() {
        assert_eq!(
            tokens("a < b <3 </>c"),
            vec![chars("a "), chars("<"), chars(" b "), chars("<"), chars("3 "), chars("c")]
        );
    }

    #[test]
    fn unterminated_tag_is_dropped() {
        assert_eq!(tokens("x<div class=\"a"), vec![chars("x")]);
    }

    #[test]
    fn self_closing_flag() {
        let toks = tokens("<br/><img src=a />");
        assert!(matches!(&toks[0], Token::StartTag(t) if t.self_closing && t.name == "br"));
        assert!(matches!(&toks[1], Token::StartTag(t) if t.self_closing && t.attr("src") == Some("a")));
    }

    #[test]
    fn doctype_is_recognized() {
        assert_eq!(tokens("<!DOCTYPE html><p>"), vec![Token::Doctype, start("p", &[])]);
    }
}
