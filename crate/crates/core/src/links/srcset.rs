/// One `srcset` entry: a URL and its optional width or density descriptor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageCandidate {
    pub url: String,
    pub descriptor: Option<String>,
}

fn is_ws(c: char) -> bool {
    matches!(c, ' ' | '\t' | '\n' | '\x0C' | '\r')
}

/// Splits a `srcset` value into candidates.
///
/// A URL is a run of non-whitespace, so commas inside `data:` URLs
/// survive; trailing commas on a URL end the candidate. Descriptors run to
/// the next comma outside parentheses.
pub fn parse_srcset(input: &str) -> Vec<ImageCandidate> {
    let mut out = Vec::new();
    let mut rest = input;
    loop {
        rest = rest.trim_start_matches(|c| is_ws(c) || c == ',');
        if rest.is_empty() {
            return out;
        }
        let url_end = rest.find(is_ws).unwrap_or(rest.len());
        let raw_url = &rest[..url_end];
        rest = &rest[url_end..];
        let url = raw_url.trim_end_matches(',');
        if url.len() != raw_url.len() {
            out.push(ImageCandidate {
                url: url.to_string(),
                descriptor: None,
            });
            continue;
        }
        let mut depth = 0usize;
        let mut end = rest.len();
        for (i, c) in rest.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth = depth.saturating_sub(1),
                ',' if depth == 0 => {
                    end = i;
                    break;
                }
                _ => {}
            }
        }
        let descriptor = rest[..end].trim_matches(is_ws);
        rest = &rest[end..];
        out.push(ImageCandidate {
            url: url.to_string(),
            descriptor: (!descriptor.is_empty()).then(|| descriptor.to_string()),
        });
    }
}
