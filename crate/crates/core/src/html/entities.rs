//! Character reference decoding (`&amp;`, `&#x41;`, legacy `&copy` ...).

use std::collections::HashMap;
use std::sync::LazyLock;

/// Named references keyed without the leading `&`, e.g. `"amp;"` and the
/// legacy `"amp"`.
static NAMED: LazyLock<HashMap<&'static str, &'static str>> = LazyLock::new(|| {
    entities::ENTITIES
        .iter()
        .map(|e| (&e.entity[1..], e.characters))
        .collect()
});

static LONGEST_NAME: LazyLock<usize> =
    LazyLock::new(|| NAMED.keys().map(|k| k.len()).max().unwrap_or(0));

/// Replacements for numeric references in the C1 range.
const C1_REMAP: [(u32, char); 27] = [
    (0x80, '\u{20AC}'),
    (0x82, '\u{201A}'),
    (0x83, '\u{0192}'),
    (0x84, '\u{201E}'),
    (0x85, '\u{2026}'),
    (0x86, '\u{2020}'),
    (0x87, '\u{2021}'),
    (0x88, '\u{02C6}'),
    (0x89, '\u{2030}'),
    (0x8A, '\u{0160}'),
    (0x8B, '\u{2039}'),
    (0x8C, '\u{0152}'),
    (0x8E, '\u{017D}'),
    (0x91, '\u{2018}'),
    (0x92, '\u{2019}'),
    (0x93, '\u{201C}'),
    (0x94, '\u{201D}'),
    (0x95, '\u{2022}'),
    (0x96, '\u{2013}'),
    (0x97, '\u{2014}'),
    (0x98, '\u{02DC}'),
    (0x99, '\u{2122}'),
    (0x9A, '\u{0161}'),
    (0x9B, '\u{203A}'),
    (0x9C, '\u{0153}'),
    (0x9D, '\u{009D}'),
    (0x9E, '\u{017E}'),
];

/// Tries to decode a character reference at the start of `input`, which
/// begins just after the `&`. Returns the decoded text and the number of
/// bytes consumed from `input`.
pub(crate) fn decode_reference(input: &str, in_attribute: bool) -> Option<(String, usize)> {
    let bytes = input.as_bytes();
    match bytes.first()? {
        b'#' => decode_numeric(input),
        c if c.is_ascii_alphanumeric() => decode_named(input, in_attribute),
        _ => None,
    }
}

fn decode_numeric(input: &str) -> Option<(String, usize)> {
    let bytes = input.as_bytes();
    let (radix, start) = match bytes.get(1) {
        Some(b'x' | b'X') => (16, 2),
        _ => (10, 1),
    };
    let digits = bytes[start..]
        .iter()
        .take_while(|b| match radix {
            16 => b.is_ascii_hexdigit(),
            _ => b.is_ascii_digit(),
        })
        .count();
    if digits == 0 {
        return None;
    }
    let end = start + digits;
    let consumed = if bytes.get(end) == Some(&b';') { end + 1 } else { end };
    let value = u32::from_str_radix(&input[start..end], radix).unwrap_or(u32::MAX);
    Some((numeric_char(value).to_string(), consumed))
}

fn numeric_char(value: u32) -> char {
    if value == 0 || value > 0x10FFFF || (0xD800..=0xDFFF).contains(&value) {
        return '\u{FFFD}';
    }
    if let Some(&(_, c)) = C1_REMAP.iter().find(|(v, _)| *v == value) {
        return c;
    }
    char::from_u32(value).unwrap_or('\u{FFFD}')
}

fn decode_named(input: &str, in_attribute: bool) -> Option<(String, usize)> {
    let name_len = input
        .bytes()
        .take(*LONGEST_NAME)
        .take_while(|b| b.is_ascii_alphanumeric())
        .count();
    let has_semicolon = input.as_bytes().get(name_len) == Some(&b';');
    if has_semicolon {
        if let Some(chars) = NAMED.get(&input[..=name_len]) {
            return Some((chars.to_string(), name_len + 1));
        }
    }
    // Longest legacy (semicolon-less) prefix match.
    for len in (1..=name_len).rev() {
        let candidate = &input[..len];
        if let Some(chars) = NAMED.get(candidate) {
            if in_attribute {
                let next = input.as_bytes().get(len);
                if matches!(next, Some(b) if *b == b'=' || b.is_ascii_alphanumeric()) {
                    return None;
                }
            }
            return Some((chars.to_string(), len));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dec(s: &str) -> Option<(String, usize)> {
        decode_reference(s, false)
    }

    #[test]
    fn named_with_semicolon() {
        assert_eq!(dec("amp; rest"), Some(("&".into(), 4)));
        assert_eq!(dec("hellip;"), Some(("\u{2026}".into(), 7)));
        assert_eq!(dec("NotEqualTilde;"), Some(("\u{2242}\u{338}".into(), 14)));
    }

    #[test]
    fn legacy_without_semicolon() {
        assert_eq!(dec("copy 2009"), Some(("\u{a9}".into(), 4)));
        assert_eq!(dec("notit;"), Some(("\u{ac}".into(), 3)));
        assert_eq!(dec("bogus;"), None);
    }

    #[test]
    fn attribute_legacy_rule() {
        assert_eq!(decode_reference("amp=1", true), None);
        assert_eq!(decode_reference("ampx", true), None);
        assert_eq!(decode_reference("amp;x", true), Some(("&".into(), 4)));
        assert_eq!(decode_reference("amp x", true), Some(("&".into(), 3)));
    }

    #[test]
    fn numeric() {
        assert_eq!(dec("#65;"), Some(("A".into(), 4)));
        assert_eq!(dec("#x41"), Some(("A".into(), 4)));
        assert_eq!(dec("#X1F600;"), Some(("\u{1F600}".into(), 8)));
        assert_eq!(dec("#0;"), Some(("\u{FFFD}".into(), 3)));
        assert_eq!(dec("#x80;"), Some(("\u{20AC}".into(), 5)));
        assert_eq!(dec("#xD800;"), Some(("\u{FFFD}".into(), 7)));
        assert_eq!(dec("#99999999999;"), Some(("\u{FFFD}".into(), 13)));
        assert_eq!(dec("#;"), None);
        assert_eq!(dec("#x;"), None);
    }
}
