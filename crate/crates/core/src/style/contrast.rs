use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed color {0:?}: expected #RRGGBB")]
pub struct MalformedColor(pub String);

/// An sRGB color written as `#RRGGBB`. Displays in uppercase hex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rgb(pub [u8; 3]);

impl Rgb {
    pub fn parse(s: &str) -> Result<Self, MalformedColor> {
        let err = || MalformedColor(s.to_string());
        let hex = s.strip_prefix('#').ok_or_else(err)?;
        if hex.len() != 6 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(err());
        }
        let channel = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).map_err(|_| err());
        Ok(Rgb([channel(0)?, channel(2)?, channel(4)?]))
    }

    /// WCAG relative luminance, 0.0 for black to 1.0 for white.
    pub fn relative_luminance(self) -> f64 {
        let lin = |c: u8| {
            let c = f64::from(c) / 255.0;
            if c <= 0.04045 {
                c / 12.92
            } else {
                ((c + 0.055) / 1.055).powf(2.4)
            }
        };
        let [r, g, b] = self.0;
        0.2126 * lin(r) + 0.7152 * lin(g) + 0.0722 * lin(b)
    }

    pub fn contrast_with(self, other: Rgb) -> f64 {
        let (a, b) = (self.relative_luminance(), other.relative_luminance());
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        (hi + 0.05) / (lo + 0.05)
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [r, g, b] = self.0;
        write!(f, "#{r:02X}{g:02X}{b:02X}")
    }
}

impl FromStr for Rgb {
    type Err = MalformedColor;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rgb::parse(s)
    }
}

impl Serialize for Rgb {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rgb {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Rgb::parse(&raw).map_err(serde::de::Error::custom)
    }
}

/// Contrast ratio between two `#RRGGBB` colors, from 1.0 to 21.0.
pub fn contrast_ratio(fg: &str, bg: &str) -> Result<f64, MalformedColor> {
    Ok(Rgb::parse(fg)?.contrast_with(Rgb::parse(bg)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremes() {
        assert_eq!(contrast_ratio("#000000", "#FFFFFF").unwrap(), 21.0);
        assert_eq!(contrast_ratio("#FFFFFF", "#000000").unwrap(), 21.0);
        assert_eq!(contrast_ratio("#ABCDEF", "#abcdef").unwrap(), 1.0);
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["000000", "#FFF", "#GGGGGG", "#0000000", ""] {
            assert!(contrast_ratio(bad, "#000000").is_err(), "{bad}");
        }
    }

    #[test]
    fn displays_uppercase() {
        assert_eq!(Rgb::parse("#ffff00").unwrap().to_string(), "#FFFF00");
    }
}
