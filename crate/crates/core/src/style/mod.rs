//! The style pass: find every author presentation carrier, strip it, and
//! install one Clear Print stylesheet.

mod contrast;
mod preset;

use crate::html::{Document, ElementData, NodeId, NodeKind};

pub use contrast::{contrast_ratio, MalformedColor, Rgb};
pub use preset::{
    clamp_scale, render_stylesheet, Alignment, ClearPrintPreset, PresetCatalog, PresetError,
    MIN_FONT_SIZE, SCALE_RANGE,
};

/// Attribute that marks the injected stylesheet.
pub const MARKER_ATTR: &str = "data-clearlens";

/// Presentational attributes removed from every element.
pub const PRESENTATIONAL_ATTRS: &[&str] = &[
    "font", "bgcolor", "color", "align", "text", "link", "vlink", "alink", "background", "border",
    "cellpadding", "cellspacing", "valign",
];

/// Attributes removed only from non-media elements.
pub const SIZE_ATTRS: &[&str] = &["width", "height"];

/// Elements whose `width`/`height` describe intrinsic media size.
const MEDIA_ELEMENTS: &[&str] = &[
    "img", "video", "audio", "canvas", "iframe", "embed", "object", "svg", "source", "picture",
    "input",
];

/// Deprecated presentational wrappers that are unwrapped, keeping content.
pub const WRAPPER_ELEMENTS: &[&str] = &["font", "center", "big", "small", "marquee", "blink"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StyleKind {
    StyleElement { marked: bool, content: String },
    ExternalStylesheetLink { href: String },
    InlineStyleAttr { value: String },
    PresentationalAttr { name: String, value: String },
    ScriptElement,
    WrapperElement { tag: String },
}

/// One carrier of author presentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StyleComponent {
    pub node: NodeId,
    pub kind: StyleKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StyleAction {
    /// Delete the element or attribute.
    Remove,
    /// Replace the element by its children.
    RemoveElementKeepChildren,
    /// Already the Clear Print sheet for this preset.
    Keep,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StyleStats {
    pub styles_removed: usize,
    pub scripts_removed: usize,
}

pub fn is_presentational(tag: &str, attr: &str) -> bool {
    PRESENTATIONAL_ATTRS.contains(&attr)
        || (SIZE_ATTRS.contains(&attr) && !MEDIA_ELEMENTS.contains(&tag))
}

fn is_stylesheet_link(el: &ElementData) -> bool {
    el.tag == "link"
        && el.attr("rel").is_some_and(|rel| {
            rel.split_ascii_whitespace()
                .any(|t| t.eq_ignore_ascii_case("stylesheet"))
        })
}

fn text_of(doc: &Document, id: NodeId) -> String {
    doc.children(id)
        .iter()
        .filter_map(|&c| match &doc.node(c).kind {
            NodeKind::Text(t) => Some(t.as_str()),
            _ => None,
        })
        .collect()
}

/// Every style and script carrier, in document order. Element-level
/// components come before the attribute components of the same element.
pub fn extract_style_components(doc: &Document) -> Vec<StyleComponent> {
    let mut out = Vec::new();
    for id in doc.descendants() {
        let Some(el) = doc.element(id) else {
            continue;
        };
        let kind = match el.tag.as_str() {
            "script" => Some(StyleKind::ScriptElement),
            "style" => Some(StyleKind::StyleElement {
                marked: el.attr(MARKER_ATTR) == Some("1"),
                content: text_of(doc, id),
            }),
            _ if is_stylesheet_link(el) => Some(StyleKind::ExternalStylesheetLink {
                href: el.attr("href").unwrap_or_default().to_string(),
            }),
            tag if WRAPPER_ELEMENTS.contains(&tag) => Some(StyleKind::WrapperElement {
                tag: tag.to_string(),
            }),
            _ => None,
        };
        if let Some(kind) = kind {
            out.push(StyleComponent { node: id, kind });
        }
        for a in &el.attrs {
            let kind = if a.name == "style" {
                StyleKind::InlineStyleAttr {
                    value: a.value.clone(),
                }
            } else if is_presentational(&el.tag, &a.name) {
                StyleKind::PresentationalAttr {
                    name: a.name.clone(),
                    value: a.value.clone(),
                }
            } else {
                continue;
            };
            out.push(StyleComponent { node: id, kind });
        }
    }
    out
}

/// The replacement for one component under `preset`.
pub fn equivalent_style(component: &StyleComponent, preset: &ClearPrintPreset) -> StyleAction {
    match &component.kind {
        StyleKind::StyleElement { marked: true, content }
            if *content == render_stylesheet(preset) =>
        {
            StyleAction::Keep
        }
        StyleKind::WrapperElement { .. } => StyleAction::RemoveElementKeepChildren,
        _ => StyleAction::Remove,
    }
}

/// Strips all author presentation and scripts from `doc` and installs the
/// Clear Print sheet as the last child of `head`.
///
/// Event-handler attributes (`onclick` ...) are dropped along with scripts.
/// Running this on its own output changes nothing.
pub fn apply_clearprint(doc: &mut Document, preset: &ClearPrintPreset) -> StyleStats {
    let sheet = render_stylesheet(preset);
    let mut stats = StyleStats::default();
    let mut kept: Option<NodeId> = None;
    for c in extract_style_components(doc) {
        let mut action = equivalent_style(&c, preset);
        if action == StyleAction::Keep && kept.is_some() {
            action = StyleAction::Remove;
        }
        match (action, &c.kind) {
            (StyleAction::Keep, _) => kept = Some(c.node),
            (StyleAction::RemoveElementKeepChildren, _) => doc.unwrap_element(c.node),
            (StyleAction::Remove, StyleKind::InlineStyleAttr { .. }) => {
                remove_attr(doc, c.node, "style");
            }
            (StyleAction::Remove, StyleKind::PresentationalAttr { name, .. }) => {
                remove_attr(doc, c.node, name);
            }
            (StyleAction::Remove, _) => doc.detach(c.node),
        }
        match (action, &c.kind) {
            (StyleAction::Keep, _) => {}
            (_, StyleKind::ScriptElement) => stats.scripts_removed += 1,
            _ => stats.styles_removed += 1,
        }
    }
    for id in doc.descendants() {
        if let Some(el) = doc.element_mut(id) {
            el.attrs.retain(|a| !is_event_handler(&a.name));
        }
    }
    let head = doc.head();
    let node = match kept {
        Some(node) => node,
        None => {
            let mut data = ElementData::new("style");
            data.set_attr(MARKER_ATTR, "1");
            let style = doc.create_element(data);
            let text = doc.create_text(sheet);
            doc.append(style, text);
            style
        }
    };
    if doc.children(head).last() != Some(&node) {
        doc.append(head, node);
    }
    stats
}

fn remove_attr(doc: &mut Document, id: NodeId, name: &str) {
    if let Some(el) = doc.element_mut(id) {
        el.remove_attr(name);
    }
}

fn is_event_handler(name: &str) -> bool {
    name.len() > 2 && name.starts_with("on")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fetcher::SourceUrl;
    use crate::html::{parse_str, serialize, text_content};

    fn parse(s: &str) -> Document {
        parse_str(s, SourceUrl::parse("http://e.com/").unwrap())
    }

    fn default_preset() -> ClearPrintPreset {
        PresetCatalog::builtin().get("default").unwrap().clone()
    }

    fn kinds(doc: &Document) -> Vec<&'static str> {
        extract_style_components(doc)
            .iter()
            .map(|c| match c.kind {
                StyleKind::StyleElement { .. } => "style",
                StyleKind::ExternalStylesheetLink { .. } => "link",
                StyleKind::InlineStyleAttr { .. } => "inline",
                StyleKind::PresentationalAttr { .. } => "attr",
                StyleKind::ScriptElement => "script",
                StyleKind::WrapperElement { .. } => "wrapper",
            })
            .collect()
    }

    #[test]
    fn finds_the_three_basic_carriers() {
        let doc = parse(
            r#"<style>p{}</style><link rel="stylesheet" href="a.css"><p style="color:red">x</p>"#,
        );
        assert_eq!(kinds(&doc), ["style", "link", "inline"]);
    }

    #[test]
    fn presentational_attributes_and_wrappers() {
        let doc = parse(r##"<body bgcolor="#fff"><font color="red">x</font>"##);
        assert_eq!(kinds(&doc), ["attr", "wrapper", "attr"]);
    }

    #[test]
    fn plain_document_has_no_components() {
        assert!(kinds(&parse("<p>just text</p>")).is_empty());
    }

    #[test]
    fn media_keeps_its_size() {
        let doc = parse(r#"<img width=10 height=20><table width=100><td height=3>x</table>"#);
        assert_eq!(kinds(&doc), ["attr", "attr"]);
    }

    #[test]
    fn alternate_stylesheets_count_too() {
        let doc = parse(r#"<link rel="Alternate StyleSheet" href=b.css><link rel=icon href=f.ico>"#);
        assert_eq!(kinds(&doc), ["link"]);
    }

    #[test]
    fn actions() {
        let p = default_preset();
        let n = parse("").root();
        let inline = StyleComponent {
            node: n,
            kind: StyleKind::InlineStyleAttr {
                value: "color:red".into(),
            },
        };
        assert_eq!(equivalent_style(&inline, &p), StyleAction::Remove);
        let marked = StyleComponent {
            node: n,
            kind: StyleKind::StyleElement {
                marked: true,
                content: render_stylesheet(&p),
            },
        };
        assert_eq!(equivalent_style(&marked, &p), StyleAction::Keep);
        let stale = StyleComponent {
            node: n,
            kind: StyleKind::StyleElement {
                marked: true,
                content: "p{}".into(),
            },
        };
        assert_eq!(equivalent_style(&stale, &p), StyleAction::Remove);
        let font = StyleComponent {
            node: n,
            kind: StyleKind::WrapperElement { tag: "font".into() },
        };
        assert_eq!(equivalent_style(&font, &p), StyleAction::RemoveElementKeepChildren);
    }

    #[test]
    fn apply_strips_everything_and_injects_one_sheet() {
        let mut doc = parse(
            r#"<head><style>p{color:red}</style><link rel=stylesheet href=a.css>
            <script src=x.js></script></head>
            <body onload="go()"><center><p style="x" align=center>Hello <font color=red>world</font></p></center>"#,
        );
        let before = text_content(&doc);
        let stats = apply_clearprint(&mut doc, &default_preset());
        assert_eq!(stats.scripts_removed, 1);
        assert_eq!(stats.styles_removed, 7);
        assert!(extract_style_components(&doc)
            .iter()
            .all(|c| matches!(c.kind, StyleKind::StyleElement { marked: true, .. })));
        assert_eq!(doc.elements_by_tag("style").len(), 1);
        let head = doc.head();
        let last = *doc.children(head).last().unwrap();
        assert_eq!(doc.element(last).unwrap().attr(MARKER_ATTR), Some("1"));
        assert!(!serialize(&doc).contains("onload"));
        assert_eq!(text_content(&doc), before);
    }

    #[test]
    fn apply_is_idempotent() {
        let mut doc = parse("<style>p{}</style><p><font>x</font> y</p>");
        apply_clearprint(&mut doc, &default_preset());
        let once = serialize(&doc);
        let mut again = parse(&once);
        let stats = apply_clearprint(&mut again, &default_preset());
        assert_eq!(stats, StyleStats::default());
        assert_eq!(serialize(&again), once);
    }

    #[test]
    fn preset_change_replaces_the_sheet() {
        let mut doc = parse("<p>x</p>");
        apply_clearprint(&mut doc, &default_preset());
        let yellow = PresetCatalog::builtin().get("yellow-on-black").unwrap().clone();
        let mut again = parse(&serialize(&doc));
        let stats = apply_clearprint(&mut again, &yellow);
        assert_eq!(stats.styles_removed, 1);
        assert_eq!(again.elements_by_tag("style").len(), 1);
        assert!(serialize(&again).contains("#FFFF00"));
    }

    #[test]
    fn style_text_is_not_content() {
        let mut doc = parse("<style>p{color:red}</style><p>kept</p>");
        apply_clearprint(&mut doc, &default_preset());
        assert_eq!(text_content(&doc), ["kept"]);
    }
}
