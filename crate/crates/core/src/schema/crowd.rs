//! The single-task crowdsourcing scheme and its mapping onto the two
//! Expert classification tasks.

use std::collections::HashSet;
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::types::{DocType, Relevance};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CrowdLabelValue {
    RelevantNews,
    RelevantSummary,
    RelevantBoth,
    NotRelevant,
    NotApplicable,
}

impl CrowdLabelValue {
    pub const ALL: [CrowdLabelValue; 5] = [
        CrowdLabelValue::RelevantNews,
        CrowdLabelValue::RelevantSummary,
        CrowdLabelValue::RelevantBoth,
        CrowdLabelValue::NotRelevant,
        CrowdLabelValue::NotApplicable,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CrowdLabelValue::RelevantNews => "Relevant – News",
            CrowdLabelValue::RelevantSummary => "Relevant – Summary",
            CrowdLabelValue::RelevantBoth => "Relevant – Both",
            CrowdLabelValue::NotRelevant => "Not Relevant",
            CrowdLabelValue::NotApplicable => "N/A",
        }
    }
}

impl fmt::Display for CrowdLabelValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CrowdLabelValue {
    type Err = Error;

    /// Accepts hyphen, en dash, em dash or `--` between the two halves.
    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownLabel {
            context: "crowd label",
            label: s.to_string(),
        };
        let normalized = s.replace(['–', '—'], "-").replace("--", "-");
        let parts: Vec<&str> = normalized.split('-').map(str::trim).collect();
        match parts.as_slice() {
            ["Relevant", "News"] => Ok(CrowdLabelValue::RelevantNews),
            ["Relevant", "Summary"] => Ok(CrowdLabelValue::RelevantSummary),
            ["Relevant", "Both"] => Ok(CrowdLabelValue::RelevantBoth),
            ["Not Relevant"] => Ok(CrowdLabelValue::NotRelevant),
            ["N/A"] => Ok(CrowdLabelValue::NotApplicable),
            _ => Err(unknown()),
        }
    }
}

impl Serialize for CrowdLabelValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CrowdLabelValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrowdLabel {
    pub document_id: String,
    pub worker_id: String,
    pub label: CrowdLabelValue,
}

/// Splits a merged crowd label back into the two Expert verdicts.
pub fn crowd_to_expert(label: CrowdLabelValue) -> (Relevance, Option<DocType>) {
    match label {
        CrowdLabelValue::RelevantNews => (Relevance::Relevant, Some(DocType::News)),
        CrowdLabelValue::RelevantSummary => (Relevance::Relevant, Some(DocType::Summary)),
        CrowdLabelValue::RelevantBoth => (Relevance::Relevant, Some(DocType::Both)),
        CrowdLabelValue::NotRelevant => (Relevance::NotRelevant, None),
        CrowdLabelValue::NotApplicable => (Relevance::NotApplicable, None),
    }
}

/// The merge direction. `None` for pairs the crowd scheme cannot express
/// (a relevant document without a News/Summary/Both type).
pub fn expert_to_crowd(relevance: Relevance, doc_type: Option<DocType>) -> Option<CrowdLabelValue> {
    match (relevance, doc_type) {
        (Relevance::Relevant, Some(DocType::News)) => Some(CrowdLabelValue::RelevantNews),
        (Relevance::Relevant, Some(DocType::Summary)) => Some(CrowdLabelValue::RelevantSummary),
        (Relevance::Relevant, Some(DocType::Both)) => Some(CrowdLabelValue::RelevantBoth),
        (Relevance::Relevant, _) => None,
        (Relevance::NotRelevant, _) => Some(CrowdLabelValue::NotRelevant),
        (Relevance::NotApplicable, _) => Some(CrowdLabelValue::NotApplicable),
    }
}

/// Reads `document_id,worker_id,label` CSV. Rejects unknown labels and a
/// second label from the same worker on the same document.
pub fn read_crowd_csv<R: Read>(reader: R) -> Result<Vec<CrowdLabel>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["document_id", "worker_id", "label"] {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header document_id,worker_id,label, got {headers:?}"),
        });
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let (doc, worker, label) = (&row[0], &row[1], &row[2]);
        let label: CrowdLabelValue = label.parse()?;
        if !seen.insert((doc.to_string(), worker.to_string())) {
            return Err(Error::Parse {
                line,
                message: format!("worker {worker} labeled document {doc} more than once"),
            });
        }
        out.push(CrowdLabel {
            document_id: doc.to_string(),
            worker_id: worker.to_string(),
            label,
        });
    }
    Ok(out)
}
