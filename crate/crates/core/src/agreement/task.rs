use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::align::{AlignBasis, Aligner, DEFAULT_THRESHOLD};
use super::alpha::{alpha, CoincidenceSummary, ReliabilityData, Unit};
use super::distance::{join_set, Distance};
use super::similarity::{TextSimilarity, TokenJaccard};
use crate::error::{Error, Result};
use crate::schema::{Annotation, Document, Relevance, SpanLabel, FACT, RELEVANCE, TYPE};
use crate::text::token_extents;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    Labels,
    Overlap,
    OverlapSim,
    Merged,
}

impl AlphaMode {
    pub const ALL: [AlphaMode; 4] = [
        AlphaMode::Labels,
        AlphaMode::Overlap,
        AlphaMode::OverlapSim,
        AlphaMode::Merged,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AlphaMode::Labels => "labels",
            AlphaMode::Overlap => "overlap",
            AlphaMode::OverlapSim => "overlap_sim",
            AlphaMode::Merged => "merged",
        }
    }
}

impl fmt::Display for AlphaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AlphaMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        AlphaMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown alpha mode {s:?}")))
    }
}

/// How two Fact spans' Fact-Type selections are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactComparison {
    #[default]
    SetEquality,
    AnyIntersection,
}

impl FactComparison {
    pub fn as_str(self) -> &'static str {
        match self {
            FactComparison::SetEquality => "set-equality",
            FactComparison::AnyIntersection => "any-intersection",
        }
    }
}

#[derive(Clone)]
pub struct AgreementConfig {
    pub threshold: f64,
    pub similarity: Arc<dyn TextSimilarity>,
    pub fact_comparison: FactComparison,
}

impl Default for AgreementConfig {
    fn default() -> Self {
        AgreementConfig {
            threshold: DEFAULT_THRESHOLD,
            similarity: Arc::new(TokenJaccard),
            fact_comparison: FactComparison::default(),
        }
    }
}

impl fmt::Debug for AgreementConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AgreementConfig")
            .field("threshold", &self.threshold)
            .field("similarity", &self.similarity.name())
            .field("fact_comparison", &self.fact_comparison)
            .finish()
    }
}

impl AgreementConfig {
    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    fn aligner(&self, use_similarity: bool) -> Aligner<'_> {
        Aligner {
            threshold: self.threshold,
            similarity: self.similarity.as_ref(),
            use_similarity,
        }
    }
}

/// A multiply-annotated document with its annotations, one per annotator.
#[derive(Debug, Clone)]
pub struct ConsensusItem<'a> {
    pub document: &'a Document,
    pub annotations: Vec<&'a Annotation>,
}

impl<'a> ConsensusItem<'a> {
    fn relevant(&self) -> Vec<&'a Annotation> {
        self.annotations
            .iter()
            .copied()
            .filter(|a| a.relevance == Some(Relevance::Relevant))
            .collect()
    }
}

/// Groups annotations by document and keeps documents annotated by at
/// least two distinct annotators. A later annotation by the same annotator
/// replaces an earlier one. Output is ordered by document id, and each
/// item's annotations by annotator id.
pub fn consensus_items<'a>(
    documents: &'a [Document],
    annotations: &[&'a Annotation],
) -> Result<Vec<ConsensusItem<'a>>> {
    let by_id: BTreeMap<&str, &Document> = documents.iter().map(|d| (d.id.as_str(), d)).collect();
    let mut grouped: BTreeMap<&str, BTreeMap<&str, &Annotation>> = BTreeMap::new();
    for a in annotations {
        grouped
            .entry(a.document_id.as_str())
            .or_default()
            .insert(a.annotator_id.as_str(), a);
    }
    let mut out = Vec::new();
    for (doc_id, anns) in grouped {
        if anns.len() < 2 {
            continue;
        }
        let document = by_id
            .get(doc_id)
            .copied()
            .ok_or_else(|| Error::DocumentNotFound(doc_id.to_string()))?;
        out.push(ConsensusItem {
            document,
            annotations: anns.into_values().collect(),
        });
    }
    Ok(out)
}

/// Consensus items eligible for span-task agreement: documents marked
/// Relevant by at least two annotators, restricted to those annotations.
pub fn span_items<'a>(items: &[ConsensusItem<'a>]) -> Vec<ConsensusItem<'a>> {
    items
        .iter()
        .filter_map(|it| {
            let relevant = it.relevant();
            (relevant.len() >= 2).then(|| ConsensusItem {
                document: it.document,
                annotations: relevant,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskAlpha {
    pub task: String,
    pub mode: AlphaMode,
    pub distance: Distance,
    pub documents: usize,
    pub summary: CoincidenceSummary,
}

impl TaskAlpha {
    pub fn alpha(&self) -> f64 {
        self.summary.alpha
    }
}

pub fn is_classification_task(task: &str) -> bool {
    task == RELEVANCE || task == TYPE
}

fn span_value(span: &SpanLabel) -> String {
    if span.is_fact() {
        join_set(&span.fact_types)
    } else {
        span.label.clone()
    }
}

fn sorted_spans<'a>(ann: &'a Annotation, task: &'a str) -> Vec<&'a SpanLabel> {
    let mut v: Vec<&SpanLabel> = ann.spans_for(task).collect();
    v.sort_by(|x, y| (x.start, x.end, &x.label, &x.id).cmp(&(y.start, y.end, &y.label, &y.id)));
    v
}

fn covered(tokens: &[(usize, usize)], spans: &[&SpanLabel]) -> Vec<bool> {
    tokens
        .iter()
        .map(|&(ts, te)| spans.iter().any(|s| s.start < te && ts < s.end))
        .collect()
}

/// Krippendorff's alpha for one task in one mode.
///
/// Classification tasks support only [`AlphaMode::Labels`], with one unit
/// per document. Span tasks build units per annotator pair on every
/// document marked Relevant by at least two annotators:
///
/// * `Labels`: the k-th span of each annotator (ordered by position) forms
///   a unit; spans beyond the shorter list contribute missing values.
/// * `Overlap` / `OverlapSim`: one binary unit per token recording whether
///   each annotator's spans cover it. With similarity, a span paired to a
///   counterpart on text similarity also counts as covering the
///   counterpart's tokens.
/// * `Merged`: one unit per pair formed by the two-step alignment.
pub fn task_alpha(
    items: &[ConsensusItem<'_>],
    task: &str,
    mode: AlphaMode,
    config: &AgreementConfig,
) -> Result<TaskAlpha> {
    if is_classification_task(task) {
        if mode != AlphaMode::Labels {
            return Err(Error::InvalidArgument(format!(
                "{task} supports only labels mode"
            )));
        }
        let distance = if task == TYPE {
            Distance::TailoredType
        } else {
            Distance::Nominal
        };
        let mut data = ReliabilityData::new(distance);
        for it in items {
            let values = it.annotations.iter().map(|a| {
                if task == TYPE {
                    a.doc_type.map(|t| t.as_str())
                } else {
                    a.relevance.map(|r| r.as_str())
                }
            });
            data.push(Unit::new(it.document.id.clone(), values));
        }
        let summary = alpha(&data).map_err(|e| no_units(e, task, mode))?;
        return Ok(TaskAlpha {
            task: task.to_string(),
            mode,
            distance,
            documents: items.len(),
            summary,
        });
    }

    let eligible = span_items(items);
    let distance = match (mode, task == FACT, config.fact_comparison) {
        (AlphaMode::Labels | AlphaMode::Merged, true, FactComparison::AnyIntersection) => {
            Distance::SetIntersection
        }
        _ => Distance::Nominal,
    };
    let mut data = ReliabilityData::new(distance);
    for it in &eligible {
        let doc = &it.document.id;
        let tokens = match mode {
            AlphaMode::Overlap | AlphaMode::OverlapSim => token_extents(&it.document.text),
            _ => Vec::new(),
        };
        for i in 0..it.annotations.len() {
            for j in i + 1..it.annotations.len() {
                let (a, b) = (it.annotations[i], it.annotations[j]);
                let tag = format!("{doc}/{}/{}", a.annotator_id, b.annotator_id);
                match mode {
                    AlphaMode::Labels => {
                        let sa = sorted_spans(a, task);
                        let sb = sorted_spans(b, task);
                        for k in 0..sa.len().max(sb.len()) {
                            data.push(Unit::new(
                                format!("{tag}/{k}"),
                                [
                                    sa.get(k).map(|s| span_value(s)),
                                    sb.get(k).map(|s| span_value(s)),
                                ],
                            ));
                        }
                    }
                    AlphaMode::Overlap | AlphaMode::OverlapSim => {
                        let mut own_a = sorted_spans(a, task);
                        let mut own_b = sorted_spans(b, task);
                        let aligned;
                        if mode == AlphaMode::OverlapSim {
                            aligned = config.aligner(true).align(&it.document.text, a, b, task)?;
                            for p in aligned.iter().filter(|p| p.basis == AlignBasis::Similarity) {
                                own_a.push(&p.span_b);
                                own_b.push(&p.span_a);
                            }
                        }
                        let ca = covered(&tokens, &own_a);
                        let cb = covered(&tokens, &own_b);
                        for (k, (x, y)) in ca.iter().zip(&cb).enumerate() {
                            data.push(Unit::new(
                                format!("{tag}/t{k}"),
                                [
                                    Some(if *x { "1" } else { "0" }),
                                    Some(if *y { "1" } else { "0" }),
                                ],
                            ));
                        }
                    }
                    AlphaMode::Merged => {
                        let pairs = config.aligner(true).align(&it.document.text, a, b, task)?;
                        for (k, p) in pairs.iter().enumerate() {
                            data.push(Unit::new(
                                format!("{tag}/{k}"),
                                [Some(span_value(&p.span_a)), Some(span_value(&p.span_b))],
                            ));
                        }
                    }
                }
            }
        }
    }
    let summary = alpha(&data).map_err(|e| no_units(e, task, mode))?;
    Ok(TaskAlpha {
        task: task.to_string(),
        mode,
        distance,
        documents: eligible.len(),
        summary,
    })
}

fn no_units(e: Error, task: &str, mode: AlphaMode) -> Error {
    match e {
        Error::NoEligibleUnits(_) => Error::NoEligibleUnits(format!("{task} ({mode})")),
        other => other,
    }
}

/// Span tasks with at least one span among the eligible annotations.
pub fn labeled_span_tasks(items: &[ConsensusItem<'_>]) -> BTreeSet<String> {
    span_items(items)
        .iter()
        .flat_map(|it| {
            it.annotations
                .iter()
                .flat_map(|a| a.spans.iter().map(|s| s.task.clone()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{Dataset, DocType, Language, CAUSE};
    use chrono::NaiveDate;

    fn doc(id: &str, text: &str) -> Document {
        Document {
            id: id.into(),
            url: format!("https://x/{id}"),
            language: Language::En,
            publication_date: NaiveDate::from_ymd_opt(2019, 1, 1).unwrap(),
            text: text.into(),
            themes: BTreeSet::new(),
            dataset: Dataset::Custom,
        }
    }

    const TEXT: &str =
        "Floods displaced 500 people in Assam. Later 500 people displaced again by floods.";

    fn ann(
        d: &str,
        who: &str,
        rel: Relevance,
        t: DocType,
        spans: &[(usize, usize, &str)],
    ) -> Annotation {
        let mut a = Annotation::new(d, who, rel, t);
        for (k, (s, e, l)) in spans.iter().enumerate() {
            a.spans
                .push(SpanLabel::new(format!("{who}-{k}"), CAUSE, *l, *s, *e));
        }
        a
    }

    #[test]
    fn unanimous_is_one_in_every_mode() {
        let docs = vec![doc("d1", TEXT), doc("d2", TEXT)];
        let spans = [(0, 6, "Disaster"), (44, 50, "Conflict")];
        let anns = vec![
            ann("d1", "a", Relevance::Relevant, DocType::News, &spans),
            ann("d1", "b", Relevance::Relevant, DocType::News, &spans),
            ann(
                "d2",
                "a",
                Relevance::Relevant,
                DocType::Summary,
                &spans[..1],
            ),
            ann(
                "d2",
                "b",
                Relevance::Relevant,
                DocType::Summary,
                &spans[..1],
            ),
        ];
        let refs: Vec<&Annotation> = anns.iter().collect();
        let items = consensus_items(&docs, &refs).unwrap();
        let cfg = AgreementConfig::default();
        assert_eq!(
            task_alpha(&items, TYPE, AlphaMode::Labels, &cfg)
                .unwrap()
                .alpha(),
            1.0
        );
        for mode in AlphaMode::ALL {
            assert_eq!(
                task_alpha(&items, CAUSE, mode, &cfg).unwrap().alpha(),
                1.0,
                "{mode}"
            );
        }
        assert!(task_alpha(&items, TYPE, AlphaMode::Merged, &cfg).is_err());
    }

    #[test]
    fn similarity_rescues_displaced_mentions() {
        // Same phrase marked at two different places.
        let docs = vec![doc("d1", TEXT), doc("d2", TEXT)];
        let anns = vec![
            ann(
                "d1",
                "a",
                Relevance::Relevant,
                DocType::News,
                &[(7, 27, "Disaster")],
            ),
            ann(
                "d1",
                "b",
                Relevance::Relevant,
                DocType::News,
                &[(44, 64, "Disaster")],
            ),
            ann(
                "d2",
                "a",
                Relevance::Relevant,
                DocType::News,
                &[(0, 6, "Disaster")],
            ),
            ann(
                "d2",
                "b",
                Relevance::Relevant,
                DocType::News,
                &[(0, 6, "Conflict")],
            ),
        ];
        let refs: Vec<&Annotation> = anns.iter().collect();
        let items = consensus_items(&docs, &refs).unwrap();
        let cfg = AgreementConfig::default();
        let overlap = task_alpha(&items, CAUSE, AlphaMode::Overlap, &cfg)
            .unwrap()
            .alpha();
        let with_sim = task_alpha(&items, CAUSE, AlphaMode::OverlapSim, &cfg)
            .unwrap()
            .alpha();
        assert!(with_sim > overlap, "{with_sim} vs {overlap}");
        assert_eq!(with_sim, 1.0);
        let merged = task_alpha(&items, CAUSE, AlphaMode::Merged, &cfg).unwrap();
        assert_eq!(merged.summary.units_used, 2);
    }

    #[test]
    fn span_tasks_need_two_relevant_votes() {
        let docs = vec![doc("d1", TEXT)];
        let anns = vec![
            ann(
                "d1",
                "a",
                Relevance::Relevant,
                DocType::News,
                &[(0, 6, "Disaster")],
            ),
            ann(
                "d1",
                "b",
                Relevance::NotRelevant,
                DocType::NotApplicable,
                &[],
            ),
        ];
        let refs: Vec<&Annotation> = anns.iter().collect();
        let items = consensus_items(&docs, &refs).unwrap();
        assert_eq!(items.len(), 1);
        assert!(span_items(&items).is_empty());
        assert!(matches!(
            task_alpha(
                &items,
                CAUSE,
                AlphaMode::Merged,
                &AgreementConfig::default()
            ),
            Err(Error::NoEligibleUnits(_))
        ));
        assert!(labeled_span_tasks(&items).is_empty());
    }

    #[test]
    fn fact_comparison_modes() {
        let docs = vec![doc("d1", TEXT), doc("d2", TEXT)];
        let mut anns = Vec::new();
        for (d, ta, tb) in [
            ("d1", vec!["displaced"], vec!["displaced", "homeless"]),
            ("d2", vec!["evacuated"], vec!["stranded"]),
        ] {
            for (who, types) in [("a", ta.clone()), ("b", tb)] {
                let mut a = Annotation::new(d, who, Relevance::Relevant, DocType::News);
                a.spans.push(
                    SpanLabel::new(format!("{who}f"), FACT, "Relevant fact", 7, 27)
                        .with_fact_types(types),
                );
                anns.push(a);
            }
        }
        let refs: Vec<&Annotation> = anns.iter().collect();
        let items = consensus_items(&docs, &refs).unwrap();
        let strict =
            task_alpha(&items, FACT, AlphaMode::Merged, &AgreementConfig::default()).unwrap();
        let loose_cfg = AgreementConfig {
            fact_comparison: FactComparison::AnyIntersection,
            ..AgreementConfig::default()
        };
        let loose = task_alpha(&items, FACT, AlphaMode::Merged, &loose_cfg).unwrap();
        assert_eq!(strict.distance, Distance::Nominal);
        assert_eq!(loose.distance, Distance::SetIntersection);
        assert!(loose.alpha() > strict.alpha());
    }

    #[test]
    fn missing_documents_are_reported() {
        let anns = [
            ann("ghost", "a", Relevance::Relevant, DocType::News, &[]),
            ann("ghost", "b", Relevance::Relevant, DocType::News, &[]),
        ];
        let refs: Vec<&Annotation> = anns.iter().collect();
        assert!(matches!(
            consensus_items(&[], &refs),
            Err(Error::DocumentNotFound(_))
        ));
    }
}
