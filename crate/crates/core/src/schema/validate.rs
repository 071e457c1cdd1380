use std::collections::{BTreeMap, BTreeSet, HashSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::def::{SchemaDef, TaskKind};
use super::types::{Annotation, Document, DATE, QUANTITY, RELEVANCE, TYPE};
use crate::error::{Error, Result};
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule_id: String,
    pub severity: Severity,
    pub message: String,
    pub offending_ids: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    /// No error-severity violations; warnings do not block submission.
    pub fn is_valid(&self) -> bool {
        self.error_count() == 0
    }

    pub fn error_count(&self) -> usize {
        self.errors().count()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Warning)
    }

    pub fn has_rule(&self, rule_id: &str) -> bool {
        self.violations.iter().any(|v| v.rule_id == rule_id)
    }

    pub fn rule(&self, rule_id: &str) -> Option<&Violation> {
        self.violations.iter().find(|v| v.rule_id == rule_id)
    }

    fn push(
        &mut self,
        rule_id: impl Into<String>,
        severity: Severity,
        message: String,
        ids: Vec<String>,
    ) {
        self.violations.push(Violation {
            rule_id: rule_id.into(),
            severity,
            message,
            offending_ids: ids,
        });
    }

    fn error(&mut self, rule_id: impl Into<String>, message: String, ids: Vec<String>) {
        self.push(rule_id, Severity::Error, message, ids);
    }

    fn warn(&mut self, rule_id: impl Into<String>, message: String, ids: Vec<String>) {
        self.push(rule_id, Severity::Warning, message, ids);
    }
}

/// `true` for exactly eight ASCII digits that decode to a calendar date.
pub fn is_valid_yyyymmdd(value: &str) -> bool {
    value.len() == 8
        && value.bytes().all(|b| b.is_ascii_digit())
        && NaiveDate::parse_from_str(value, "%Y%m%d").is_ok()
}

/// Checks one annotation against the scheme and its document.
///
/// Every violated rule is reported; the function never stops at the first
/// problem. Fails only when the annotation targets another document.
pub fn validate_annotation(
    doc: &Document,
    ann: &Annotation,
    schema: &SchemaDef,
) -> Result<ValidationReport> {
    if ann.document_id != doc.id {
        return Err(Error::UnknownDocument {
            expected: doc.id.clone(),
            annotation_doc: ann.document_id.clone(),
        });
    }
    let mut report = ValidationReport::default();
    let text_len = text::char_len(&doc.text);

    for task in schema.required_tasks() {
        let present = match task.name.as_str() {
            RELEVANCE => ann.relevance.is_some(),
            TYPE => ann.doc_type.is_some(),
            _ => true,
        };
        if !present {
            report.error(
                format!("required-task-missing:{}", task.name),
                format!("required task {} has no label", task.name),
                vec![],
            );
        }
    }

    let fact_types: HashSet<&str> = schema.fact_types().iter().map(String::as_str).collect();
    let mut seen_ids = HashSet::new();
    for span in &ann.spans {
        let id = vec![span.id.clone()];
        if !seen_ids.insert(span.id.as_str()) {
            report.error(
                "duplicate-span-id",
                format!("span id {} used more than once", span.id),
                id.clone(),
            );
        }

        match schema.task(&span.task) {
            Some(t) if t.kind == TaskKind::Span => {
                if !t.has_label(&span.label) {
                    report.error(
                        "unknown-label",
                        format!(
                            "label {:?} is not defined for task {}",
                            span.label, span.task
                        ),
                        id.clone(),
                    );
                }
            }
            _ => report.error(
                "unknown-task",
                format!("{:?} is not a span task", span.task),
                id.clone(),
            ),
        }

        if span.start >= span.end || span.end > text_len {
            report.error(
                "span-out-of-range",
                format!(
                    "span [{}, {}) is empty or exceeds the text length {}",
                    span.start, span.end, text_len
                ),
                id.clone(),
            );
        }

        if span.is_fact() {
            if span.fact_types.is_empty() {
                report.warn(
                    "fact-types-empty",
                    "Fact span has no Fact Type".to_string(),
                    id.clone(),
                );
            }
            let unknown: Vec<_> = span
                .fact_types
                .iter()
                .filter(|t| !fact_types.contains(t.as_str()))
                .cloned()
                .collect();
            if !unknown.is_empty() {
                report.error(
                    "unknown-fact-type",
                    format!("Fact Type(s) {unknown:?} are not in the configured list"),
                    id.clone(),
                );
            }
        } else if !span.fact_types.is_empty() {
            report.error(
                "fact-types-on-non-fact",
                format!("{} span carries Fact Types", span.task),
                id.clone(),
            );
        }

        if span.task == QUANTITY {
            if let Some(q) = &span.count_qualifier {
                if !schema.is_known_qualifier(q) {
                    report.warn(
                        "unknown-qualifier",
                        format!("qualifier {q:?} is not in the known list"),
                        id.clone(),
                    );
                }
            }
        } else if span.count_value.is_some() || span.count_qualifier.is_some() {
            report.error(
                "count-on-non-quantity",
                format!("{} span carries a count transcription", span.task),
                id.clone(),
            );
        }

        match (&span.date_value, span.task == DATE) {
            (Some(d), true) if !is_valid_yyyymmdd(d) => report.error(
                "bad-date",
                format!("date {d:?} is not a valid YYYYMMDD date"),
                id.clone(),
            ),
            (Some(_), false) => report.error(
                "date-on-non-date",
                format!("{} span carries a date transcription", span.task),
                id.clone(),
            ),
            _ => {}
        }
    }

    let mut by_extent: BTreeMap<(&str, usize, usize), BTreeMap<&str, Vec<String>>> =
        BTreeMap::new();
    for span in &ann.spans {
        by_extent
            .entry((span.task.as_str(), span.start, span.end))
            .or_default()
            .entry(span.label.as_str())
            .or_default()
            .push(span.id.clone());
    }
    for ((task, start, end), labels) in &by_extent {
        if labels.len() > 1 {
            let ids = labels.values().flatten().cloned().collect();
            report.error(
                "multi-label-same-extent",
                format!("{task} span [{start}, {end}) carries several labels"),
                ids,
            );
        }
    }

    let mut linked: BTreeSet<&str> = BTreeSet::new();
    let mut seen_relations = HashSet::new();
    for rel in &ann.relations {
        let ids = vec![rel.source.clone(), rel.target.clone()];
        if !seen_relations.insert((rel.source.as_str(), rel.target.as_str())) {
            report.warn(
                "duplicate-relation",
                format!("relation {} -> {} repeated", rel.source, rel.target),
                ids.clone(),
            );
        }
        let (source, target) = (ann.span(&rel.source), ann.span(&rel.target));
        let (Some(source), Some(target)) = (source, target) else {
            report.error(
                "relation-unknown-span",
                format!(
                    "relation {} -> {} refers to a missing span",
                    rel.source, rel.target
                ),
                ids,
            );
            continue;
        };
        if !source.is_fact() {
            report.error(
                "relation-source-not-fact",
                format!(
                    "relation source {} is a {} span, not a Fact",
                    source.id, source.task
                ),
                ids.clone(),
            );
        }
        if target.is_fact() {
            report.error(
                "relation-target-is-fact",
                format!("relation target {} is a Fact span", target.id),
                ids.clone(),
            );
        }
        if source.is_fact() && !target.is_fact() {
            linked.insert(target.id.as_str());
        }
    }

    let orphans: Vec<String> = ann
        .spans
        .iter()
        .filter(|s| !s.is_fact() && !linked.contains(s.id.as_str()))
        .map(|s| s.id.clone())
        .collect();
    if !orphans.is_empty() {
        report.error(
            "orphan-span",
            format!("{} span(s) are not linked to any Fact", orphans.len()),
            orphans,
        );
    }

    Ok(report)
}
