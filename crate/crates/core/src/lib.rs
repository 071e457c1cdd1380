//! Toolkit for monitoring internal displacement in news text.
//!
//! The crate covers the whole desk-scale pipeline:
//!
//! - [`ingestion`]: GDELT export parsing, theme and keyword filters, article
//!   fetching and reproducible yearly samples.
//! - [`schema`]: the nine-task Expert scheme, the merged crowd label, and
//!   the annotation validator.
//! - [`store`]: a directory of JSONL logs holding a project, its documents,
//!   consensus assignments and the two-round annotation history.
//! - [`agreement`]: Krippendorff's alpha with nominal and tailored metrics,
//!   two-step span alignment and per-task agreement reports.
//! - [`mlpipe`]: TF-IDF n-gram features, five classifiers, stratified
//!   cross-validation and repeated train/test evaluation.
//!
//! Runnable walkthroughs of each capability live in the crate's `examples/`.

pub mod agreement;
pub mod error;
pub mod ingestion;
pub mod jsonl;
pub mod mlpipe;
pub mod schema;
pub mod store;
pub mod synth;
pub mod text;

pub use error::{Error, FetchFailure, Result};
