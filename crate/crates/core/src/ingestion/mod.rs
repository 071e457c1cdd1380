//! Document acquisition: GDELT export records are filtered by theme, the
//! article behind each URL is fetched and filtered by keyword, and the
//! surviving documents can be sampled per year.

mod fetch;
mod filter;
mod gdelt;
mod sample;
mod stats;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use fetch::{
    extract_main_text, fetch_all, fetch_article, published_date, DocumentDraft, FetchedPage,
    Fetcher, SnapshotFetcher, StaticFetcher,
};
pub use filter::{
    default_keywords, default_themes, filter_by_keywords, filter_by_themes, parse_list, read_list,
    KeywordMatcher,
};
pub use gdelt::{format_line, parse_line, read_export, GdeltRecord};
pub use sample::sample_period;
pub use stats::{theme_stats, ThemeCount, ThemeStats};

use crate::error::{Error, FetchFailure, Result};
use crate::jsonl;
use crate::schema::{Dataset, Document};

/// Stable document id derived from the article URL.
pub fn document_id(url: &str) -> String {
    let digest = Sha256::digest(url.as_bytes());
    let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
    format!("doc-{hex}")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestConfig {
    pub themes: BTreeSet<String>,
    pub keywords: Vec<String>,
    pub dataset: Dataset,
    /// Maximum requests in flight.
    pub fetch_limit: usize,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            themes: default_themes(),
            keywords: default_keywords(),
            dataset: Dataset::Custom,
            fetch_limit: 8,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IngestOutcome {
    pub documents: Vec<Document>,
    pub off_theme: usize,
    pub unsupported_language: usize,
    pub duplicate_url: usize,
    pub no_keyword: usize,
    pub failures: Vec<(String, FetchFailure)>,
}

/// Runs the acquisition pipeline. Theme filtering happens before any fetch;
/// keyword filtering applies to the extracted article text.
pub fn ingest(
    records: &[GdeltRecord],
    fetcher: &dyn Fetcher,
    config: &IngestConfig,
) -> IngestOutcome {
    let mut outcome = IngestOutcome::default();
    let mut seen = BTreeSet::new();
    let mut candidates = Vec::new();
    for rec in records {
        if !filter_by_themes(rec, &config.themes) {
            outcome.off_theme += 1;
        } else if rec.language().is_none() {
            outcome.unsupported_language += 1;
        } else if !seen.insert(rec.url.clone()) {
            outcome.duplicate_url += 1;
        } else {
            candidates.push(rec);
        }
    }

    let urls: Vec<String> = candidates.iter().map(|r| r.url.clone()).collect();
    let matcher = KeywordMatcher::new(&config.keywords);
    for (rec, fetched) in candidates
        .iter()
        .zip(fetch_all(&urls, fetcher, config.fetch_limit))
    {
        let draft = match fetched {
            Ok(d) => d,
            Err(Error::Fetch { url, reason }) => {
                outcome.failures.push((url, reason));
                continue;
            }
            Err(other) => {
                outcome.failures.push((
                    rec.url.clone(),
                    FetchFailure::Network {
                        message: other.to_string(),
                    },
                ));
                continue;
            }
        };
        if !matcher.matches(&draft.text) {
            outcome.no_keyword += 1;
            continue;
        }
        let mut themes: BTreeSet<String> = rec.themes.iter().cloned().collect();
        themes.retain(|t| !t.is_empty());
        outcome.documents.push(Document {
            id: document_id(&rec.url),
            url: rec.url.clone(),
            language: rec.language().expect("checked above"),
            publication_date: draft.publication_date.unwrap_or(rec.record_date),
            text: draft.text,
            themes,
            dataset: config.dataset,
        });
    }
    outcome
}

pub fn write_documents(path: &Path, docs: &[Document]) -> Result<()> {
    jsonl::write_all(path, docs)
}

pub fn read_documents(path: &Path) -> Result<Vec<Document>> {
    jsonl::read_all(path)
}
