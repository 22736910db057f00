//! Pages the service renders itself. Both are built as documents and
//! skinned with the same Clear Print sheet as transformed pages.

use crate::fetcher::SourceUrl;
use crate::html::{parse_str, serialize, Document, ElementData, NodeId};
use crate::pipeline::declare_utf8;
use crate::style::{apply_clearprint, ClearPrintPreset, SCALE_RANGE};

fn blank(title: &str) -> Document {
    let base = SourceUrl::parse("http://local.invalid/").expect("static URL");
    let mut doc = parse_str("<!DOCTYPE html><html lang=\"en\"><head></head><body></body></html>", base);
    let head = doc.head();
    let t = element(&mut doc, head, "title", &[]);
    text(&mut doc, t, title);
    let mut viewport = ElementData::new("meta");
    viewport.set_attr("name", "viewport");
    viewport.set_attr("content", "width=device-width, initial-scale=1");
    let viewport = doc.create_element(viewport);
    doc.append(head, viewport);
    doc
}

fn element(doc: &mut Document, parent: NodeId, tag: &str, attrs: &[(&str, &str)]) -> NodeId {
    let mut data = ElementData::new(tag);
    for (k, v) in attrs {
        data.set_attr(k, *v);
    }
    let id = doc.create_element(data);
    doc.append(parent, id);
    id
}

fn text(doc: &mut Document, parent: NodeId, s: &str) {
    let t = doc.create_text(s);
    doc.append(parent, t);
}

fn finish(mut doc: Document, preset: &ClearPrintPreset) -> String {
    apply_clearprint(&mut doc, preset);
    declare_utf8(&mut doc);
    serialize(&doc)
}

/// The built-in home page: a plain GET form to `/render`.
pub fn landing_page<'a>(
    preset: &ClearPrintPreset,
    presets: impl IntoIterator<Item = &'a str>,
) -> String {
    let mut doc = blank("clearlens");
    let body = doc.body();
    let main = element(&mut doc, body, "main", &[]);
    let h1 = element(&mut doc, main, "h1", &[]);
    text(&mut doc, h1, "clearlens");
    let p = element(&mut doc, main, "p", &[]);
    text(
        &mut doc,
        p,
        "Type a web address and press Read. The page comes back in large, high-contrast text, and every link you follow stays readable.",
    );
    let form = element(&mut doc, main, "form", &[("action", "/render"), ("method", "get")]);

    let row = element(&mut doc, form, "p", &[]);
    let label = element(&mut doc, row, "label", &[("for", "url")]);
    text(&mut doc, label, "Web address");
    element(
        &mut doc,
        row,
        "input",
        &[
            ("id", "url"),
            ("name", "url"),
            ("type", "text"),
            ("inputmode", "url"),
            ("autocomplete", "url"),
            ("required", ""),
            ("placeholder", "example.com"),
        ],
    );

    let row = element(&mut doc, form, "p", &[]);
    let label = element(&mut doc, row, "label", &[("for", "preset")]);
    text(&mut doc, label, "Colours");
    let select = element(&mut doc, row, "select", &[("id", "preset"), ("name", "preset")]);
    for name in presets {
        let attrs: &[(&str, &str)] = if name == preset.name {
            &[("value", name), ("selected", "")]
        } else {
            &[("value", name)]
        };
        let option = element(&mut doc, select, "option", attrs);
        text(&mut doc, option, name);
    }

    let row = element(&mut doc, form, "p", &[]);
    let label = element(&mut doc, row, "label", &[("for", "scale")]);
    text(&mut doc, label, "Text size");
    let (min, max) = (SCALE_RANGE.0.to_string(), SCALE_RANGE.1.to_string());
    element(
        &mut doc,
        row,
        "input",
        &[
            ("id", "scale"),
            ("name", "scale"),
            ("type", "number"),
            ("min", &min),
            ("max", &max),
            ("step", "0.25"),
            ("value", "1"),
        ],
    );

    let row = element(&mut doc, form, "p", &[]);
    let button = element(&mut doc, row, "button", &[("type", "submit")]);
    text(&mut doc, button, "Read");
    finish(doc, preset)
}

/// An error explained in plain words, with a way back to the form.
pub fn error_page(preset: &ClearPrintPreset, title: &str, message: &str) -> String {
    let mut doc = blank(title);
    let body = doc.body();
    let main = element(&mut doc, body, "main", &[]);
    let h1 = element(&mut doc, main, "h1", &[]);
    text(&mut doc, h1, title);
    let p = element(&mut doc, main, "p", &[]);
    text(&mut doc, p, message);
    let p = element(&mut doc, main, "p", &[]);
    let a = element(&mut doc, p, "a", &[("href", "/")]);
    text(&mut doc, a, "Try another address");
    finish(doc, preset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::style::PresetCatalog;

    #[test]
    fn error_text_is_escaped() {
        let catalog = PresetCatalog::builtin();
        let html = error_page(catalog.get("default").unwrap(), "Bad <address>", "a & b <script>");
        assert!(html.contains("<h1>Bad &lt;address&gt;</h1>"));
        assert!(html.contains("a &amp; b &lt;script&gt;"));
        assert!(!html.contains("<script>"));
    }

    #[test]
    fn landing_form_is_plain_get() {
        let catalog = PresetCatalog::builtin();
        let html = landing_page(catalog.get("large-print").unwrap(), catalog.names());
        assert!(html.contains(r#"<form action="/render" method="get">"#));
        assert!(html.contains(r#"<option value="large-print" selected="">"#));
        assert!(!html.contains("<script"));
    }
}
