use std::collections::BTreeSet;
use std::path::Path;

use super::gdelt::GdeltRecord;
use crate::error::{Error, Result};
use crate::text;

const DEFAULT_KEYWORDS: &str = include_str!("../../data/keywords.txt");
const DEFAULT_THEMES: &str = include_str!("../../data/themes.txt");

/// Parses a newline-delimited list, ignoring blank lines and `#` comments.
pub fn parse_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

pub fn read_list(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_list(&text))
}

/// The displacement keyword list used to filter GDELT results.
pub fn default_keywords() -> Vec<String> {
    parse_list(DEFAULT_KEYWORDS)
}

/// GDELT theme codes for the six displacement-related themes.
pub fn default_themes() -> BTreeSet<String> {
    parse_list(DEFAULT_THEMES).into_iter().collect()
}

/// `true` iff the record carries at least one wanted theme.
pub fn filter_by_themes(rec: &GdeltRecord, wanted: &BTreeSet<String>) -> bool {
    rec.themes.iter().any(|t| wanted.contains(t))
}

/// Word-boundary keyword matcher. Multi-word keywords match contiguous
/// token runs; matching is case-insensitive.
#[derive(Debug, Clone)]
pub struct KeywordMatcher {
    phrases: Vec<Vec<String>>,
}

impl KeywordMatcher {
    pub fn new<S: AsRef<str>>(keywords: &[S]) -> Self {
        let phrases = keywords
            .iter()
            .map(|k| text::tokens(k.as_ref()))
            .filter(|p| !p.is_empty())
            .collect();
        KeywordMatcher { phrases }
    }

    pub fn matches(&self, text: &str) -> bool {
        let tokens = text::tokens(text);
        self.phrases
            .iter()
            .any(|p| tokens.windows(p.len()).any(|w| w == p.as_slice()))
    }

    /// Keywords that fire on `text`, in configured order.
    pub fn hits(&self, text: &str) -> Vec<String> {
        let tokens = text::tokens(text);
        self.phrases
            .iter()
            .filter(|p| tokens.windows(p.len()).any(|w| w == p.as_slice()))
            .map(|p| p.join(" "))
            .collect()
    }
}

pub fn filter_by_keywords<S: AsRef<str>>(text: &str, keywords: &[S]) -> bool {
    KeywordMatcher::new(keywords).matches(text)
}
