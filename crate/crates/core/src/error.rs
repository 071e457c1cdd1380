use std::path::PathBuf;

use thiserror::Error;

use crate::schema::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("annotation refers to document {annotation_doc}, expected {expected}")]
    UnknownDocument {
        expected: String,
        annotation_doc: String,
    },

    #[error("unknown label {label:?} for {context}")]
    UnknownLabel {
        context: &'static str,
        label: String,
    },

    #[error("insufficient population: requested {requested}, only {available} available")]
    InsufficientPopulation { requested: usize, available: usize },

    #[error("fetch failed for {url}: {reason}")]
    Fetch { url: String, reason: FetchFailure },

    #[error("not enough annotators: need {needed}, project has {available}")]
    NotEnoughAnnotators { needed: usize, available: usize },

    #[error("invalid project: {0}")]
    InvalidProject(String),

    #[error("no assignment for document {document_id} and annotator {annotator_id}")]
    NoAssignment {
        document_id: String,
        annotator_id: String,
    },

    #[error("annotation rejected: {} error(s)", .0.error_count())]
    ValidationFailed(ValidationReport),

    #[error("duplicate submission for document {document_id} by {annotator_id} in round {round}")]
    DuplicateSubmission {
        document_id: String,
        annotator_id: String,
        round: String,
    },

    #[error("unknown document {0}")]
    DocumentNotFound(String),

    #[error("spans belong to different documents: {0} vs {1}")]
    CrossDocument(String, String),

    #[error("no eligible units for {0}")]
    NoEligibleUnits(String),

    #[error("empty vocabulary: no n-gram reaches min_df = {min_df}")]
    EmptyVocabulary { min_df: usize },

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("cannot build {folds} stratified folds: class with {smallest} sample(s)")]
    FoldDegeneracy { folds: usize, smallest: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Distinct reasons an article could not be turned into a document draft.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FetchFailure {
    Network { message: String },
    Status { status: u16 },
    NotHtml { content_type: String },
    EmptyExtraction,
}

impl std::fmt::Display for FetchFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FetchFailure::Network { message } => write!(f, "network failure: {message}"),
            FetchFailure::Status { status } => write!(f, "http status {status}"),
            FetchFailure::NotHtml { content_type } => {
                write!(f, "non-html payload ({content_type})")
            }
            FetchFailure::EmptyExtraction => f.write_str("no article text extracted"),
        }
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
