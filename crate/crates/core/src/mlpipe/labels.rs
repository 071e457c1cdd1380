use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::schema::{resolve_majority, Annotation, DocType, Majority, Relevance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelTask {
    Relevance,
    TypeNewsVsSummary,
}

impl LabelTask {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelTask::Relevance => "relevance",
            LabelTask::TypeNewsVsSummary => "type",
        }
    }
}

impl std::str::FromStr for LabelTask {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "relevance" => Ok(LabelTask::Relevance),
            "type" | "type_news_vs_summary" => Ok(LabelTask::TypeNewsVsSummary),
            other => Err(crate::Error::InvalidArgument(format!(
                "unknown task {other:?}"
            ))),
        }
    }
}

/// Binary-labeled documents, ordered by document id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSet {
    pub task: LabelTask,
    pub document_ids: Vec<String>,
    pub labels: Vec<bool>,
    /// Documents per resolved class before binarization.
    pub class_counts: BTreeMap<String, usize>,
}

impl LabeledSet {
    fn new(task: LabelTask) -> Self {
        LabeledSet {
            task,
            document_ids: Vec::new(),
            labels: Vec::new(),
            class_counts: BTreeMap::new(),
        }
    }

    fn push(&mut self, id: &str, class: &str, positive: bool) {
        self.document_ids.push(id.to_string());
        self.labels.push(positive);
        *self.class_counts.entry(class.to_string()).or_default() += 1;
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|l| **l).count()
    }

    pub fn negatives(&self) -> usize {
        self.len() - self.positives()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSets {
    pub relevance: LabeledSet,
    pub doc_type: LabeledSet,
}

impl LabeledSets {
    pub fn get(&self, task: LabelTask) -> &LabeledSet {
        match task {
            LabelTask::Relevance => &self.relevance,
            LabelTask::TypeNewsVsSummary => &self.doc_type,
        }
    }
}

/// Resolves every document by majority vote and derives both binary sets.
///
/// Relevance: documents whose verdict resolves to Relevant (positive) or
/// Not Relevant (negative). Type: documents not resolved as Not Relevant
/// whose Type resolves to News or Both (positive) or Summary (negative).
/// Conflicts and N/A outcomes are left out.
pub fn build_labeled_sets(annotations: &[&Annotation]) -> LabeledSets {
    let mut by_doc: BTreeMap<&str, Vec<&Annotation>> = BTreeMap::new();
    for a in annotations {
        by_doc.entry(a.document_id.as_str()).or_default().push(a);
    }
    let mut relevance = LabeledSet::new(LabelTask::Relevance);
    let mut doc_type = LabeledSet::new(LabelTask::TypeNewsVsSummary);
    for (id, anns) in by_doc {
        let rel_votes: Vec<Relevance> = anns.iter().filter_map(|a| a.relevance).collect();
        let rel = resolve_majority(&rel_votes);
        match rel {
            Majority::Decided(Relevance::Relevant) => relevance.push(id, "Relevant", true),
            Majority::Decided(Relevance::NotRelevant) => relevance.push(id, "Not Relevant", false),
            _ => {}
        }
        if rel == Majority::Decided(Relevance::NotRelevant) {
            continue;
        }
        let type_votes: Vec<DocType> = anns.iter().filter_map(|a| a.doc_type).collect();
        match resolve_majority(&type_votes) {
            Majority::Decided(t @ (DocType::News | DocType::Both)) => {
                doc_type.push(id, t.as_str(), true)
            }
            Majority::Decided(DocType::Summary) => doc_type.push(id, "Summary", false),
            _ => {}
        }
    }
    LabeledSets {
        relevance,
        doc_type,
    }
}
