//! Annotation data model for the Expert and Crowdsourcing schemes, and the
//! validator enforcing the structural rules of a submission.

mod crowd;
mod def;
mod majority;
mod types;
mod validate;

pub use crowd::{crowd_to_expert, expert_to_crowd, read_crowd_csv, CrowdLabel, CrowdLabelValue};
pub use def::{NestedChoice, SchemaDef, TaskDef, TaskKind, Transcription, TranscriptionFormat};
pub use majority::{resolve_majority, Majority};
pub use types::*;
pub use validate::{is_valid_yyyymmdd, validate_annotation, Severity, ValidationReport, Violation};
