//! Project storage: a directory of JSONL logs.
//!
//! ```text
//! <dir>/project.json        project settings
//! <dir>/documents.jsonl     one Document per line
//! <dir>/assignments.jsonl   assignment events; the last line per pair wins
//! <dir>/annotations.jsonl   every submission ever accepted, append-only
//! ```
//!
//! The in-memory index is rebuilt from the logs on [`Store::open`]. All
//! mutations take `&mut self`, so a shared store needs one writer lock.

mod assign;

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use assign::{assign, consensus_count, Assignment, AssignmentStatus};

use crate::error::{Error, Result};
use crate::jsonl;
use crate::schema::{
    validate_annotation, Annotation, Document, Language, Relevance, Round, SchemaDef,
};

const PROJECT_FILE: &str = "project.json";
const DOCUMENTS_FILE: &str = "documents.jsonl";
const ASSIGNMENTS_FILE: &str = "assignments.jsonl";
const ANNOTATIONS_FILE: &str = "annotations.jsonl";
const SCHEMA_FILE: &str = "schema.json";

pub const EXPORT_FORMAT: &str = "idwatch-annotations";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub id: String,
    pub name: String,
    pub language: Language,
    pub schema_version: u32,
    pub annotators: Vec<String>,
    pub consensus_fraction: f64,
    pub annotators_per_consensus_doc: usize,
}

impl Project {
    pub fn new(id: impl Into<String>, name: impl Into<String>) -> Self {
        Project {
            id: id.into(),
            name: name.into(),
            language: Language::En,
            schema_version: 1,
            annotators: Vec::new(),
            consensus_fraction: 0.0,
            annotators_per_consensus_doc: 1,
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.consensus_fraction) {
            return Err(Error::InvalidProject(format!(
                "consensus_fraction {} outside [0, 1]",
                self.consensus_fraction
            )));
        }
        if self.consensus_fraction > 0.0 && self.annotators_per_consensus_doc < 2 {
            return Err(Error::InvalidProject(
                "consensus documents need at least two annotators".to_string(),
            ));
        }
        let mut team = self.annotators.clone();
        team.sort();
        team.dedup();
        if team.len() != self.annotators.len() {
            return Err(Error::InvalidProject("duplicate annotator ids".to_string()));
        }
        Ok(())
    }

    pub fn has_annotator(&self, id: &str) -> bool {
        self.annotators.iter().any(|a| a == id)
    }
}

/// An accepted submission as recorded in the log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredAnnotation {
    pub id: String,
    pub seq: u64,
    #[serde(flatten)]
    pub annotation: Annotation,
}

/// Which rounds to read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundSelector {
    Initial,
    Review,
    /// Latest submission per (document, annotator): review supersedes initial.
    #[default]
    Current,
}

impl std::str::FromStr for RoundSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "initial" => Ok(RoundSelector::Initial),
            "review" => Ok(RoundSelector::Review),
            "current" | "" => Ok(RoundSelector::Current),
            other => Err(Error::InvalidArgument(format!("unknown round {other:?}"))),
        }
    }
}

impl std::fmt::Display for RoundSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RoundSelector::Initial => "initial",
            RoundSelector::Review => "review",
            RoundSelector::Current => "current",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportFilter {
    pub round: RoundSelector,
    pub annotator: Option<String>,
    pub relevance: Option<Relevance>,
}

/// First line of an export file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportHeader {
    pub format: String,
    pub version: u32,
    pub project: String,
    pub round: RoundSelector,
    pub count: usize,
}

pub struct Store {
    dir: PathBuf,
    project: Project,
    schema: SchemaDef,
    documents: Vec<Document>,
    doc_index: HashMap<String, usize>,
    assignments: Vec<Assignment>,
    assignment_index: HashMap<(String, String), usize>,
    annotations: Vec<StoredAnnotation>,
}

impl Store {
    /// Initializes a new project directory. Fails if one already exists.
    pub fn create(dir: &Path, project: Project) -> Result<Self> {
        project.check()?;
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(PROJECT_FILE);
        if path.exists() {
            return Err(Error::InvalidProject(format!(
                "{} already exists",
                path.display()
            )));
        }
        std::fs::write(&path, serde_json::to_string_pretty(&project)? + "\n")
            .map_err(|e| Error::io(&path, e))?;
        for f in [DOCUMENTS_FILE, ASSIGNMENTS_FILE, ANNOTATIONS_FILE] {
            let p = dir.join(f);
            std::fs::write(&p, "").map_err(|e| Error::io(&p, e))?;
        }
        Self::open(dir)
    }

    /// Opens a project directory and rebuilds the index from its logs.
    pub fn open(dir: &Path) -> Result<Self> {
        let path = dir.join(PROJECT_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let project: Project = serde_json::from_str(&text)?;
        project.check()?;
        let schema_path = dir.join(SCHEMA_FILE);
        let schema = if schema_path.exists() {
            SchemaDef::load(&schema_path)?
        } else {
            SchemaDef::expert()
        };

        let mut store = Store {
            dir: dir.to_path_buf(),
            project,
            schema,
            documents: Vec::new(),
            doc_index: HashMap::new(),
            assignments: Vec::new(),
            assignment_index: HashMap::new(),
            annotations: Vec::new(),
        };
        for doc in jsonl::read_all::<Document>(&dir.join(DOCUMENTS_FILE))? {
            store.index_document(doc);
        }
        for a in jsonl::read_all::<Assignment>(&dir.join(ASSIGNMENTS_FILE))? {
            store.index_assignment(a);
        }
        store.annotations = jsonl::read_all(&dir.join(ANNOTATIONS_FILE))?;
        Ok(store)
    }

    fn index_document(&mut self, doc: Document) {
        self.doc_index.insert(doc.id.clone(), self.documents.len());
        self.documents.push(doc);
    }

    fn index_assignment(&mut self, a: Assignment) {
        let key = (a.document_id.clone(), a.annotator_id.clone());
        match self.assignment_index.get(&key) {
            Some(&i) => self.assignments[i] = a,
            None => {
                self.assignment_index.insert(key, self.assignments.len());
                self.assignments.push(a);
            }
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn project(&self) -> &Project {
        &self.project
    }

    pub fn schema(&self) -> &SchemaDef {
        &self.schema
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn document(&self, id: &str) -> Option<&Document> {
        self.doc_index.get(id).map(|&i| &self.documents[i])
    }

    pub fn assignments(&self) -> &[Assignment] {
        &self.assignments
    }

    pub fn assignment(&self, document_id: &str, annotator_id: &str) -> Option<&Assignment> {
        self.assignment_index
            .get(&(document_id.to_string(), annotator_id.to_string()))
            .map(|&i| &self.assignments[i])
    }

    /// Pending assignments of one annotator in assignment order.
    pub fn pending_for<'a>(
        &'a self,
        annotator_id: &'a str,
    ) -> impl Iterator<Item = &'a Assignment> + 'a {
        self.assignments.iter().filter(move |a| {
            a.annotator_id == annotator_id && a.status == AssignmentStatus::Pending
        })
    }

    /// Adds documents not yet in the store. Returns how many were added.
    pub fn add_documents(&mut self, docs: &[Document]) -> Result<usize> {
        let mut fresh = Vec::new();
        let mut batch = std::collections::HashSet::new();
        for d in docs {
            if d.text.trim().is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "document {} has empty text",
                    d.id
                )));
            }
            if !self.doc_index.contains_key(&d.id) && batch.insert(d.id.as_str()) {
                fresh.push(d.clone());
            }
        }
        jsonl::append_all(&self.dir.join(DOCUMENTS_FILE), &fresh)?;
        let n = fresh.len();
        for d in fresh {
            self.index_document(d);
        }
        Ok(n)
    }

    /// Assigns every document that has no assignment yet.
    pub fn assign_unassigned(&mut self, seed: u64) -> Result<Vec<Assignment>> {
        let assigned: std::collections::HashSet<&str> = self
            .assignments
            .iter()
            .map(|a| a.document_id.as_str())
            .collect();
        let ids: Vec<String> = self
            .documents
            .iter()
            .filter(|d| !assigned.contains(d.id.as_str()))
            .map(|d| d.id.clone())
            .collect();
        let new = assign(&self.project, &ids, seed)?;
        jsonl::append_all(&self.dir.join(ASSIGNMENTS_FILE), &new)?;
        for a in &new {
            self.index_assignment(a.clone());
        }
        Ok(new)
    }

    /// Validates and records one annotation.
    ///
    /// An initial-round submission needs a pending assignment; a review
    /// round needs an already submitted one. Nothing is written when the
    /// submission is rejected.
    pub fn submit(&mut self, annotation: Annotation) -> Result<String> {
        let key = (
            annotation.document_id.clone(),
            annotation.annotator_id.clone(),
        );
        let Some(&slot) = self.assignment_index.get(&key) else {
            return Err(Error::NoAssignment {
                document_id: key.0,
                annotator_id: key.1,
            });
        };
        let status = self.assignments[slot].status;
        let duplicate = || Error::DuplicateSubmission {
            document_id: annotation.document_id.clone(),
            annotator_id: annotation.annotator_id.clone(),
            round: annotation.round.to_string(),
        };
        let next_status = match (annotation.round, status) {
            (Round::Initial, AssignmentStatus::Pending) => AssignmentStatus::Submitted,
            (Round::Initial, _) => return Err(duplicate()),
            (Round::Review, AssignmentStatus::Submitted) => AssignmentStatus::Reviewed,
            (Round::Review, AssignmentStatus::Reviewed) => return Err(duplicate()),
            (Round::Review, AssignmentStatus::Pending) => {
                return Err(Error::InvalidArgument(
                    "review round submitted before the initial round".to_string(),
                ))
            }
        };
        let doc = self
            .document(&annotation.document_id)
            .ok_or_else(|| Error::DocumentNotFound(annotation.document_id.clone()))?;
        let report = validate_annotation(doc, &annotation, &self.schema)?;
        if !report.is_valid() {
            return Err(Error::ValidationFailed(report));
        }

        let seq = self.annotations.len() as u64 + 1;
        let stored = StoredAnnotation {
            id: format!("ann-{seq:06}"),
            seq,
            annotation,
        };
        jsonl::append(&self.dir.join(ANNOTATIONS_FILE), &stored)?;
        let mut updated = self.assignments[slot].clone();
        updated.status = next_status;
        jsonl::append(&self.dir.join(ASSIGNMENTS_FILE), &updated)?;
        self.assignments[slot] = updated;
        let id = stored.id.clone();
        self.annotations.push(stored);
        Ok(id)
    }

    /// Every accepted submission, oldest first.
    pub fn history(&self) -> &[StoredAnnotation] {
        &self.annotations
    }

    /// `true` when no later submission supersedes this one.
    pub fn is_current(&self, id: &str) -> bool {
        let Some(s) = self.annotations.iter().find(|s| s.id == id) else {
            return false;
        };
        !self.annotations.iter().any(|o| {
            o.seq > s.seq
                && o.annotation.document_id == s.annotation.document_id
                && o.annotation.annotator_id == s.annotation.annotator_id
        })
    }

    /// The annotations visible under a round selector, in log order.
    pub fn annotations(&self, round: RoundSelector) -> Vec<&StoredAnnotation> {
        match round {
            RoundSelector::Initial => self
                .annotations
                .iter()
                .filter(|s| s.annotation.round == Round::Initial)
                .collect(),
            RoundSelector::Review => self
                .annotations
                .iter()
                .filter(|s| s.annotation.round == Round::Review)
                .collect(),
            RoundSelector::Current => self
                .annotations
                .iter()
                .filter(|s| self.is_current(&s.id))
                .collect(),
        }
    }

    pub fn select(&self, filter: &ExportFilter) -> Vec<&Annotation> {
        self.annotations(filter.round)
            .into_iter()
            .map(|s| &s.annotation)
            .filter(|a| {
                filter
                    .annotator
                    .as_ref()
                    .is_none_or(|id| *id == a.annotator_id)
            })
            .filter(|a| filter.relevance.is_none_or(|r| a.relevance == Some(r)))
            .collect()
    }

    /// Writes the interchange file: a header line, then one annotation per
    /// line.
    pub fn export<W: Write>(&self, filter: &ExportFilter, mut out: W) -> Result<usize> {
        let selected = self.select(filter);
        let header = ExportHeader {
            format: EXPORT_FORMAT.to_string(),
            version: 1,
            project: self.project.id.clone(),
            round: filter.round,
            count: selected.len(),
        };
        let io = |e| Error::io("<export>", e);
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n").map_err(io)?;
        for a in &selected {
            serde_json::to_writer(&mut out, a)?;
            out.write_all(b"\n").map_err(io)?;
        }
        out.flush().map_err(io)?;
        Ok(selected.len())
    }
}

/// Reads an export file back.
pub fn import_annotations<R: BufRead>(reader: R) -> Result<(ExportHeader, Vec<Annotation>)> {
    let mut lines = reader.lines();
    let first = lines
        .next()
        .ok_or(Error::Parse {
            line: 1,
            message: "missing header line".to_string(),
        })?
        .map_err(|e| Error::io("<import>", e))?;
    let header: ExportHeader = serde_json::from_str(&first).map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if header.format != EXPORT_FORMAT {
        return Err(Error::Parse {
            line: 1,
            message: format!("unexpected format {:?}", header.format),
        });
    }
    let rest: String = lines
        .map(|l| l.map(|l| l + "\n"))
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io("<import>", e))?;
    let annotations = jsonl::read_from(rest.as_bytes()).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line: line + 1,
            message,
        },
        other => other,
    })?;
    Ok((header, annotations))
}
