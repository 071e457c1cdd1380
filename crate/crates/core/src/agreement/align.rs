use serde::{Deserialize, Serialize};

use super::similarity::{TextSimilarity, TokenJaccard};
use crate::error::{Error, Result};
use crate::schema::{Annotation, SpanLabel};
use crate::text::slice_chars;

pub const DEFAULT_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlignBasis {
    Overlap,
    Similarity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentPair {
    pub span_a: SpanLabel,
    pub span_b: SpanLabel,
    pub basis: AlignBasis,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub similarity_score: Option<f64>,
}

/// Characters shared by the two half-open extents.
pub fn intersection(a: &SpanLabel, b: &SpanLabel) -> usize {
    let lo = a.start.max(b.start);
    let hi = a.end.min(b.end);
    hi.saturating_sub(lo)
}

/// Positional overlap of two spans from the same document.
pub fn span_overlap(a: &SpanLabel, b: &SpanLabel) -> bool {
    intersection(a, b) > 0
}

/// Checked variant: both spans must come from the same document.
pub fn span_overlap_in(doc_a: &str, a: &SpanLabel, doc_b: &str, b: &SpanLabel) -> Result<bool> {
    if doc_a != doc_b {
        return Err(Error::CrossDocument(doc_a.to_string(), doc_b.to_string()));
    }
    Ok(span_overlap(a, b))
}

pub fn text_similarity(a: &str, b: &str) -> f64 {
    TokenJaccard.score(a, b)
}

type SpanKey<'a> = (usize, usize, &'a str, &'a str);

fn key(s: &SpanLabel) -> SpanKey<'_> {
    (s.start, s.end, s.label.as_str(), s.id.as_str())
}

/// Orientation-free tie-break: the smaller span key first, then the larger.
fn pair_key<'a>(a: &'a SpanLabel, b: &'a SpanLabel) -> (SpanKey<'a>, SpanKey<'a>) {
    let (ka, kb) = (key(a), key(b));
    if ka <= kb {
        (ka, kb)
    } else {
        (kb, ka)
    }
}

/// Two-step one-to-one span matcher.
pub struct Aligner<'s> {
    pub threshold: f64,
    pub similarity: &'s dyn TextSimilarity,
    /// When false only the overlap step runs.
    pub use_similarity: bool,
}

impl Default for Aligner<'static> {
    fn default() -> Self {
        Aligner {
            threshold: DEFAULT_THRESHOLD,
            similarity: &TokenJaccard,
            use_similarity: true,
        }
    }
}

impl<'s> Aligner<'s> {
    pub fn new(threshold: f64, similarity: &'s dyn TextSimilarity) -> Self {
        Aligner {
            threshold,
            similarity,
            use_similarity: true,
        }
    }

    pub fn overlap_only(mut self) -> Self {
        self.use_similarity = false;
        self
    }

    /// Aligns the `task` spans of two annotations of the document whose
    /// text is `text`. Overlapping pairs are taken greedily by largest
    /// intersection; the remaining spans are then paired greedily by highest
    /// similarity at or above the threshold. Unmatched spans are dropped.
    pub fn align(
        &self,
        text: &str,
        ann_a: &Annotation,
        ann_b: &Annotation,
        task: &str,
    ) -> Result<Vec<AlignmentPair>> {
        if ann_a.document_id != ann_b.document_id {
            return Err(Error::CrossDocument(
                ann_a.document_id.clone(),
                ann_b.document_id.clone(),
            ));
        }
        let spans_a: Vec<&SpanLabel> = ann_a.spans_for(task).collect();
        let spans_b: Vec<&SpanLabel> = ann_b.spans_for(task).collect();
        let mut used_a = vec![false; spans_a.len()];
        let mut used_b = vec![false; spans_b.len()];
        let mut pairs = Vec::new();

        let mut overlaps = Vec::new();
        for (i, a) in spans_a.iter().enumerate() {
            for (j, b) in spans_b.iter().enumerate() {
                let inter = intersection(a, b);
                if inter > 0 {
                    overlaps.push((inter, i, j));
                }
            }
        }
        overlaps.sort_by(|x, y| {
            y.0.cmp(&x.0).then_with(|| {
                pair_key(spans_a[x.1], spans_b[x.2]).cmp(&pair_key(spans_a[y.1], spans_b[y.2]))
            })
        });
        for (_, i, j) in overlaps {
            if !used_a[i] && !used_b[j] {
                used_a[i] = true;
                used_b[j] = true;
                pairs.push(AlignmentPair {
                    span_a: spans_a[i].clone(),
                    span_b: spans_b[j].clone(),
                    basis: AlignBasis::Overlap,
                    similarity_score: None,
                });
            }
        }

        if self.use_similarity {
            let texts_a: Vec<String> = spans_a
                .iter()
                .map(|s| slice_chars(text, s.start, s.end).to_string())
                .collect();
            let texts_b: Vec<String> = spans_b
                .iter()
                .map(|s| slice_chars(text, s.start, s.end).to_string())
                .collect();
            let mut similar = Vec::new();
            for i in (0..spans_a.len()).filter(|i| !used_a[*i]) {
                for j in (0..spans_b.len()).filter(|j| !used_b[*j]) {
                    let score = self.similarity.score(&texts_a[i], &texts_b[j]);
                    if score >= self.threshold {
                        similar.push((score, i, j));
                    }
                }
            }
            similar.sort_by(|x, y| {
                y.0.total_cmp(&x.0).then_with(|| {
                    pair_key(spans_a[x.1], spans_b[x.2]).cmp(&pair_key(spans_a[y.1], spans_b[y.2]))
                })
            });
            for (score, i, j) in similar {
                if !used_a[i] && !used_b[j] {
                    used_a[i] = true;
                    used_b[j] = true;
                    pairs.push(AlignmentPair {
                        span_a: spans_a[i].clone(),
                        span_b: spans_b[j].clone(),
                        basis: AlignBasis::Similarity,
                        similarity_score: Some(score),
                    });
                }
            }
        }
        Ok(pairs)
    }
}

/// Two-step alignment with the default token Jaccard similarity.
pub fn align_spans(
    text: &str,
    ann_a: &Annotation,
    ann_b: &Annotation,
    task: &str,
    threshold: f64,
) -> Result<Vec<AlignmentPair>> {
    Aligner::new(threshold, &TokenJaccard).align(text, ann_a, ann_b, task)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{DocType, Relevance, CAUSE};
    use proptest::prelude::*;

    fn span(id: &str, start: usize, end: usize) -> SpanLabel {
        SpanLabel::new(id, CAUSE, "Disaster", start, end)
    }

    fn ann(who: &str, spans: Vec<SpanLabel>) -> Annotation {
        let mut a = Annotation::new("d", who, Relevance::Relevant, DocType::News);
        a.spans = spans;
        a
    }

    /// Text with `phrase` written at character offset `at`.
    fn text_with(parts: &[(usize, &str)]) -> String {
        let mut chars: Vec<char> = vec![' '; 500];
        for (at, phrase) in parts {
            for (k, c) in phrase.chars().enumerate() {
                chars[at + k] = c;
            }
        }
        chars.into_iter().collect()
    }

    #[test]
    fn overlap_examples() {
        assert!(span_overlap(&span("a", 10, 20), &span("b", 15, 30)));
        assert!(!span_overlap(&span("a", 0, 5), &span("b", 5, 9)));
        assert!(span_overlap(&span("a", 0, 100), &span("b", 40, 41)));
        assert!(matches!(
            span_overlap_in("d1", &span("a", 0, 5), "d2", &span("b", 0, 5)),
            Err(Error::CrossDocument(..))
        ));
    }

    #[test]
    fn similarity_examples() {
        assert_eq!(
            text_similarity("500 people displaced", "500 people displaced"),
            1.0
        );
        assert_eq!(text_similarity("flood in Assam", "drought hits Kenya"), 0.0);
        assert_eq!(
            text_similarity("500 people displaced", "500 persons displaced"),
            0.5
        );
    }

    #[test]
    fn overlap_step() {
        let text = text_with(&[(10, "evacuated from here")]);
        let pairs = align_spans(
            &text,
            &ann("a", vec![span("a1", 10, 20)]),
            &ann("b", vec![span("b1", 12, 25)]),
            CAUSE,
            0.8,
        )
        .unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].basis, AlignBasis::Overlap);
        assert_eq!(pairs[0].similarity_score, None);
    }

    #[test]
    fn similarity_step() {
        let text = text_with(&[(10, "500 displaced"), (400, "500 displaced")]);
        let pairs = align_spans(
            &text,
            &ann("a", vec![span("a1", 10, 23)]),
            &ann("b", vec![span("b1", 400, 413)]),
            CAUSE,
            0.8,
        )
        .unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].basis, AlignBasis::Similarity);
        assert_eq!(pairs[0].similarity_score, Some(1.0));
        let none = Aligner::default()
            .overlap_only()
            .align(
                &text,
                &ann("a", vec![span("a1", 10, 23)]),
                &ann("b", vec![span("b1", 400, 413)]),
                CAUSE,
            )
            .unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn neither_criterion() {
        let text = text_with(&[(10, "flood"), (400, "election")]);
        let pairs = align_spans(
            &text,
            &ann("a", vec![span("a1", 10, 15)]),
            &ann("b", vec![span("b1", 400, 408)]),
            CAUSE,
            0.8,
        )
        .unwrap();
        assert!(pairs.is_empty());
    }

    #[test]
    fn largest_intersection_wins() {
        let text = text_with(&[]);
        let a = ann("a", vec![span("a1", 0, 10)]);
        let b = ann("b", vec![span("b1", 8, 20), span("b2", 2, 9)]);
        let pairs = align_spans(&text, &a, &b, CAUSE, 0.8).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].span_b.id, "b2");
    }

    #[test]
    fn cross_document_rejected() {
        let a = ann("a", vec![]);
        let mut b = ann("b", vec![]);
        b.document_id = "other".into();
        assert!(matches!(
            align_spans("", &a, &b, CAUSE, 0.8),
            Err(Error::CrossDocument(..))
        ));
    }

    fn arb_spans(prefix: &'static str) -> impl Strategy<Value = Vec<SpanLabel>> {
        prop::collection::vec((0usize..60, 1usize..12, 0usize..3), 0..6).prop_map(move |v| {
            v.into_iter()
                .enumerate()
                .map(|(k, (s, l, lab))| {
                    SpanLabel::new(
                        format!("{prefix}{k}"),
                        CAUSE,
                        ["Disaster", "Conflict", "Other"][lab],
                        s,
                        s + l,
                    )
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn symmetric_up_to_orientation(sa in arb_spans("a"), sb in arb_spans("b")) {
            let text = "the river flooded the village and people fled the flood waters near the old bridge today";
            let a = ann("a", sa.clone());
            let b = ann("b", sb.clone());
            let ab = align_spans(text, &a, &b, CAUSE, 0.5).unwrap();
            let ba = align_spans(text, &b, &a, CAUSE, 0.5).unwrap();
            let mut left: Vec<(String, String)> = ab.iter().map(|p| (p.span_a.id.clone(), p.span_b.id.clone())).collect();
            let mut right: Vec<(String, String)> = ba.iter().map(|p| (p.span_b.id.clone(), p.span_a.id.clone())).collect();
            left.sort();
            right.sort();
            prop_assert_eq!(left, right);
            prop_assert!(ab.len() <= sa.len().min(sb.len()));
        }
    }
}
