use std::collections::BTreeSet;

use crate::text::tokens;

/// Pluggable span text similarity in `[0, 1]`.
pub trait TextSimilarity: Send + Sync {
    fn name(&self) -> &str;
    fn score(&self, a: &str, b: &str) -> f64;
}

/// Jaccard index over lowercased token sets, punctuation dropped.
#[derive(Debug, Clone, Copy, Default)]
pub struct TokenJaccard;

impl TextSimilarity for TokenJaccard {
    fn name(&self) -> &str {
        "token-jaccard"
    }

    fn score(&self, a: &str, b: &str) -> f64 {
        let ta: BTreeSet<String> = tokens(a).into_iter().collect();
        let tb: BTreeSet<String> = tokens(b).into_iter().collect();
        if ta.is_empty() && tb.is_empty() {
            return 1.0;
        }
        let inter = ta.intersection(&tb).count() as f64;
        let union = ta.union(&tb).count() as f64;
        inter / union
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jaccard() {
        let j = TokenJaccard;
        assert_eq!(j.score("Hundreds displaced", "hundreds, DISPLACED!"), 1.0);
        assert_eq!(j.score("a b c d", "a b c e"), 3.0 / 5.0);
        assert_eq!(j.score("", ""), 1.0);
        assert_eq!(j.score("x", ""), 0.0);
        assert_eq!(j.score("a b", "b a"), j.score("b a", "a b"));
    }
}
