//! Language-agnostic tokenization shared by keyword filtering, span
//! similarity and n-gram extraction.

/// Lowercased alphanumeric tokens. Every non-alphanumeric character is a
/// separator, so punctuation never survives into a token.
pub fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Number of Unicode scalar values in `text`.
pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

/// Substring by code-point offsets `[start, end)`, clamped to the text.
pub fn slice_chars(text: &str, start: usize, end: usize) -> &str {
    let mut byte_start = text.len();
    let mut byte_end = text.len();
    for (i, (b, _)) in text.char_indices().enumerate() {
        if i == start {
            byte_start = b;
        }
        if i == end {
            byte_end = b;
            break;
        }
    }
    if byte_start > byte_end {
        return "";
    }
    &text[byte_start..byte_end]
}

/// Tokens with their code-point extents `[start, end)`.
pub fn token_extents(text: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut current: Option<usize> = None;
    let mut idx = 0;
    for c in text.chars() {
        if c.is_alphanumeric() {
            current.get_or_insert(idx);
        } else if let Some(start) = current.take() {
            out.push((start, idx));
        }
        idx += 1;
    }
    if let Some(start) = current {
        out.push((start, idx));
    }
    out
}
