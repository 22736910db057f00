use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::contrast::Rgb;

/// Minimum text size in CSS pixels.
pub const MIN_FONT_SIZE: f64 = 16.0;
/// Allowed range of the user font scale.
pub const SCALE_RANGE: (f64, f64) = (0.75, 2.0);

const MIN_TEXT_CONTRAST: f64 = 7.0;
const MIN_LINK_CONTRAST: f64 = 4.5;
const MIN_LINE_HEIGHT: f64 = 1.5;

static BUILTIN: &str = include_str!("presets.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alignment {
    #[default]
    Left,
}

/// A Clear Print skin: everything the injected stylesheet is built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClearPrintPreset {
    #[serde(default)]
    pub name: String,
    pub font_family_stack: Vec<String>,
    /// CSS pixels.
    pub base_font_size: f64,
    pub line_height: f64,
    pub text_color: Rgb,
    pub background_color: Rgb,
    pub link_color: Rgb,
    /// In `ch` units.
    pub max_line_width: u32,
    #[serde(default)]
    pub alignment: Alignment,
    #[serde(default = "yes")]
    pub underline_links: bool,
    #[serde(default)]
    pub italics_allowed: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PresetError {
    #[error("preset catalog is not valid TOML: {0}")]
    Toml(String),
    #[error("preset {name:?} is invalid: {reason}")]
    Invalid { name: String, reason: String },
    #[error("unknown preset {0:?}")]
    Unknown(String),
    #[error("preset catalog is empty")]
    Empty,
}

impl ClearPrintPreset {
    pub fn validate(&self) -> Result<(), PresetError> {
        let fail = |reason: String| {
            Err(PresetError::Invalid {
                name: self.name.clone(),
                reason,
            })
        };
        let text = self.text_color.contrast_with(self.background_color);
        let link = self.link_color.contrast_with(self.background_color);
        if text < MIN_TEXT_CONTRAST {
            return fail(format!("text contrast {text:.2} is below {MIN_TEXT_CONTRAST}"));
        }
        if link < MIN_LINK_CONTRAST {
            return fail(format!("link contrast {link:.2} is below {MIN_LINK_CONTRAST}"));
        }
        if self.base_font_size.is_nan() || self.base_font_size < MIN_FONT_SIZE {
            return fail(format!("base_font_size must be at least {MIN_FONT_SIZE}px"));
        }
        if self.line_height.is_nan() || self.line_height < MIN_LINE_HEIGHT {
            return fail(format!("line_height must be at least {MIN_LINE_HEIGHT}"));
        }
        if self.font_family_stack.is_empty() {
            return fail("font_family_stack is empty".into());
        }
        if let Some(bad) = self
            .font_family_stack
            .iter()
            .find(|f| f.is_empty() || f.contains(['"', ';', '{', '}', '<', '\\']))
        {
            return fail(format!("font family {bad:?} is not allowed"));
        }
        if self.max_line_width == 0 {
            return fail("max_line_width must be positive".into());
        }
        if !self.underline_links || self.italics_allowed {
            return fail("links must be underlined and italics disallowed".into());
        }
        Ok(())
    }

    /// A copy with the font size multiplied by `scale`. The scale is clamped
    /// to [`SCALE_RANGE`] and the result never drops below
    /// [`MIN_FONT_SIZE`].
    pub fn scaled(&self, scale: f64) -> ClearPrintPreset {
        let scale = clamp_scale(scale);
        let mut out = self.clone();
        out.base_font_size = (self.base_font_size * scale).max(MIN_FONT_SIZE);
        out
    }
}

/// Clamps a user-supplied font scale; NaN becomes 1.
pub fn clamp_scale(scale: f64) -> f64 {
    if scale.is_nan() {
        1.0
    } else {
        scale.clamp(SCALE_RANGE.0, SCALE_RANGE.1)
    }
}

/// Presets keyed by name, in name order.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetCatalog {
    presets: Vec<ClearPrintPreset>,
}

impl PresetCatalog {
    /// The presets shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_toml(BUILTIN).expect("built-in presets are valid")
    }

    /// Parses a catalog where each top-level table is one preset.
    pub fn from_toml(source: &str) -> Result<Self, PresetError> {
        let tables: BTreeMap<String, ClearPrintPreset> =
            toml::from_str(source).map_err(|e| PresetError::Toml(e.to_string()))?;
        if tables.is_empty() {
            return Err(PresetError::Empty);
        }
        let mut presets = Vec::with_capacity(tables.len());
        for (name, mut preset) in tables {
            preset.name = name;
            preset.validate()?;
            presets.push(preset);
        }
        Ok(PresetCatalog { presets })
    }

    pub fn get(&self, name: &str) -> Result<&ClearPrintPreset, PresetError> {
        self.presets
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| PresetError::Unknown(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.presets.iter().map(|p| p.name.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = &ClearPrintPreset> {
        self.presets.iter()
    }
}

/// Formats a CSS number without a trailing `.0`.
fn num(v: f64) -> String {
    let s = format!("{:.3}", v);
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn font_stack(families: &[String]) -> String {
    const GENERIC: &[&str] = &["serif", "sans-serif", "monospace", "system-ui", "cursive"];
    families
        .iter()
        .map(|f| {
            if GENERIC.contains(&f.as_str()) {
                f.clone()
            } else {
                format!("\"{f}\"")
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// The Clear Print stylesheet for `preset`.
pub fn render_stylesheet(preset: &ClearPrintPreset) -> String {
    let fonts = font_stack(&preset.font_family_stack);
    let size = num(preset.base_font_size);
    let line = num(preset.line_height);
    let (fg, bg, link) = (preset.text_color, preset.background_color, preset.link_color);
    let decoration = if preset.underline_links { "underline" } else { "none" };
    let mut css = String::new();
    let _ = writeln!(css, "html {{ font-size: {size}px; }}");
    let _ = writeln!(
        css,
        "* {{ font-family: {fonts} !important; font-size: 1rem; line-height: {line} !important; \
         font-style: normal !important; text-align: left !important; color: inherit !important; \
         background: transparent !important; }}"
    );
    let _ = writeln!(
        css,
        "body {{ color: {fg} !important; background-color: {bg} !important; max-width: {}ch; margin: 0 auto; padding: 1rem; }}",
        preset.max_line_width
    );
    let _ = writeln!(css, "h1 {{ font-size: 2rem; }}");
    let _ = writeln!(css, "h2 {{ font-size: 1.5rem; }}");
    let _ = writeln!(css, "h3 {{ font-size: 1.25rem; }}");
    let _ = writeln!(css, "h1, h2, h3, h4, h5, h6, strong, b, th {{ font-weight: bold; }}");
    let _ = writeln!(
        css,
        "a, a:link, a:visited {{ color: {link} !important; text-decoration: {decoration} !important; }}"
    );
    let _ = writeln!(css, ":focus {{ outline: 3px solid {link} !important; outline-offset: 2px; }}");
    let _ = write!(css, "img, video {{ max-width: 100%; height: auto; }}");
    css
}
