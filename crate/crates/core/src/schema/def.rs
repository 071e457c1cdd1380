use std::path::Path;

use serde::{Deserialize, Serialize};

use super::types::{COMPLEX_EVENT, FACT};
use crate::error::{Error, Result};

const DEFAULT_SCHEMA: &str = include_str!("../../data/schema_v1.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Classification,
    Span,
    Relation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TranscriptionFormat {
    Integer,
    Text,
    Yyyymmdd,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcription {
    pub name: String,
    pub format: TranscriptionFormat,
}

/// A choice nested under a span task (the Fact Type list).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NestedChoice {
    pub name: String,
    pub multi_label: bool,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskDef {
    pub name: String,
    pub kind: TaskKind,
    pub required: bool,
    pub multi_label: bool,
    pub labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nested_choice: Option<NestedChoice>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nested_transcriptions: Vec<Transcription>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub guideline: String,
}

impl TaskDef {
    pub fn has_label(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }
}

/// Machine-readable annotation scheme.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaDef {
    pub version: u32,
    pub name: String,
    pub tasks: Vec<TaskDef>,
    #[serde(default)]
    pub known_qualifiers: Vec<String>,
}

impl Default for SchemaDef {
    fn default() -> Self {
        Self::expert()
    }
}

impl SchemaDef {
    /// The bundled Expert scheme.
    pub fn expert() -> Self {
        serde_json::from_str(DEFAULT_SCHEMA).expect("bundled schema is valid json")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn task(&self, name: &str) -> Option<&TaskDef> {
        self.tasks.iter().find(|t| t.name == name)
    }

    pub fn span_tasks(&self) -> impl Iterator<Item = &TaskDef> {
        self.tasks.iter().filter(|t| t.kind == TaskKind::Span)
    }

    pub fn required_tasks(&self) -> impl Iterator<Item = &TaskDef> {
        self.tasks.iter().filter(|t| t.required)
    }

    /// The configured Fact Type labels.
    pub fn fact_types(&self) -> &[String] {
        self.task(FACT)
            .and_then(|t| t.nested_choice.as_ref())
            .map(|c| c.labels.as_slice())
            .unwrap_or(&[])
    }

    pub fn is_known_qualifier(&self, qualifier: &str) -> bool {
        let q = qualifier.trim().to_lowercase();
        self.known_qualifiers.iter().any(|k| *k == q)
    }

    /// Structural checks on the scheme itself. Returns human-readable
    /// problems; empty means the scheme is usable for validation.
    pub fn check(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let relations = self
            .tasks
            .iter()
            .filter(|t| t.kind == TaskKind::Relation)
            .count();
        if relations != 1 || self.task(COMPLEX_EVENT).map(|t| t.kind) != Some(TaskKind::Relation) {
            problems.push("exactly one relation task named Complex Event is expected".to_string());
        }
        match self.task(FACT) {
            Some(t) if t.kind == TaskKind::Span => {
                if t.nested_choice.is_none() {
                    problems.push("Fact task has no nested Fact Type choice".to_string());
                }
            }
            _ => problems.push("missing span task Fact".to_string()),
        }
        for t in &self.tasks {
            if t.multi_label {
                problems.push(format!("task {} allows multiple labels", t.name));
            }
            if t.kind != TaskKind::Relation && t.labels.is_empty() {
                problems.push(format!("task {} has no labels", t.name));
            }
            if t.required && t.kind != TaskKind::Classification {
                problems.push(format!(
                    "task {} is required but not a classification",
                    t.name
                ));
            }
        }
        let mut names: Vec<_> = self.tasks.iter().map(|t| &t.name).collect();
        names.sort();
        names.dedup();
        if names.len() != self.tasks.len() {
            problems.push("duplicate task names".to_string());
        }
        problems
    }
}
