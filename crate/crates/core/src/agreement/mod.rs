//! Inter-annotator agreement: Krippendorff's alpha with nominal and
//! tailored distances, two-step span alignment, and per-task reports.

mod align;
mod alpha;
mod distance;
mod report;
mod similarity;
mod task;

pub use align::{
    align_spans, intersection, span_overlap, span_overlap_in, text_similarity, AlignBasis, Aligner,
    AlignmentPair, DEFAULT_THRESHOLD,
};
pub use alpha::{alpha, CoincidenceSummary, ReliabilityData, Unit};
pub use distance::{join_set, split_set, tailored_type_distance, Distance, SET_SEPARATOR};
pub use report::{agreement_report, store_report, AgreementReport, ReportHeader, TaskRow};
pub use similarity::{TextSimilarity, TokenJaccard};
pub use task::{
    consensus_items, is_classification_task, labeled_span_tasks, span_items, task_alpha,
    AgreementConfig, AlphaMode, ConsensusItem, FactComparison, TaskAlpha,
};
