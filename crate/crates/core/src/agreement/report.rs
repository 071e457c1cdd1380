use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::task::{
    consensus_items, is_classification_task, labeled_span_tasks, span_items, task_alpha,
    AgreementConfig, AlphaMode, ConsensusItem,
};
use crate::error::Result;
use crate::schema::{SchemaDef, TaskKind, TYPE};
use crate::store::{RoundSelector, Store};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub round: String,
    pub threshold: f64,
    pub similarity: String,
    pub fact_comparison: String,
    pub consensus_documents: usize,
    pub span_documents: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRow {
    pub task: String,
    pub alpha_labels: Option<f64>,
    pub alpha_overlap: Option<f64>,
    pub alpha_overlap_sim: Option<f64>,
    pub alpha_merged: Option<f64>,
    pub metric: String,
    /// Why a computed cell is absent, keyed by mode.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub absent: BTreeMap<String, String>,
}

impl TaskRow {
    pub fn cell(&self, mode: AlphaMode) -> Option<f64> {
        match mode {
            AlphaMode::Labels => self.alpha_labels,
            AlphaMode::Overlap => self.alpha_overlap,
            AlphaMode::OverlapSim => self.alpha_overlap_sim,
            AlphaMode::Merged => self.alpha_merged,
        }
    }

    fn set(&mut self, mode: AlphaMode, value: f64) {
        let slot = match mode {
            AlphaMode::Labels => &mut self.alpha_labels,
            AlphaMode::Overlap => &mut self.alpha_overlap,
            AlphaMode::OverlapSim => &mut self.alpha_overlap_sim,
            AlphaMode::Merged => &mut self.alpha_merged,
        };
        *slot = Some(value);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub header: ReportHeader,
    pub rows: Vec<TaskRow>,
}

impl AgreementReport {
    pub fn row(&self, task: &str) -> Option<&TaskRow> {
        self.rows.iter().find(|r| r.task == task)
    }

    /// Aligned plain-text table for terminals.
    pub fn render(&self) -> String {
        let h = &self.header;
        let mut out = format!(
            "round={} threshold={} similarity={} fact-comparison={} consensus-documents={} span-documents={}\n",
            h.round, h.threshold, h.similarity, h.fact_comparison, h.consensus_documents, h.span_documents
        );
        let width = self
            .rows
            .iter()
            .map(|r| r.task.len())
            .max()
            .unwrap_or(4)
            .max(4);
        let _ = writeln!(
            out,
            "{:<width$}  {:>8}  {:>8}  {:>13}  {:>8}  metric",
            "task", "labels", "overlap", "overlap+sim", "merged"
        );
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"));
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<width$}  {:>8}  {:>8}  {:>13}  {:>8}  {}",
                r.task,
                fmt(r.alpha_labels),
                fmt(r.alpha_overlap),
                fmt(r.alpha_overlap_sim),
                fmt(r.alpha_merged),
                r.metric
            );
        }
        out
    }
}

/// Runs every applicable mode for every agreement task of `schema`.
///
/// Classification tasks get the labels cell only. Span tasks with no span
/// among the eligible annotations are left out, as are relation tasks.
/// A cell whose computation fails is absent, with the reason recorded.
pub fn agreement_report(
    items: &[ConsensusItem<'_>],
    schema: &SchemaDef,
    round: &str,
    config: &AgreementConfig,
) -> AgreementReport {
    let header = ReportHeader {
        round: round.to_string(),
        threshold: config.threshold,
        similarity: config.similarity.name().to_string(),
        fact_comparison: config.fact_comparison.as_str().to_string(),
        consensus_documents: items.len(),
        span_documents: span_items(items).len(),
    };
    if items.is_empty() {
        return AgreementReport {
            header,
            rows: Vec::new(),
        };
    }

    let labeled = labeled_span_tasks(items);
    let tasks: Vec<&str> = schema
        .tasks
        .iter()
        .filter(|t| match t.kind {
            TaskKind::Classification => is_classification_task(&t.name),
            TaskKind::Span => labeled.contains(&t.name),
            TaskKind::Relation => false,
        })
        .map(|t| t.name.as_str())
        .collect();

    let cells: Vec<(usize, AlphaMode)> = tasks
        .iter()
        .enumerate()
        .flat_map(|(i, t)| {
            let modes: &[AlphaMode] = if is_classification_task(t) {
                &[AlphaMode::Labels]
            } else {
                &AlphaMode::ALL
            };
            modes.iter().map(move |m| (i, *m))
        })
        .collect();
    let results: Vec<_> = cells
        .par_iter()
        .map(|&(i, mode)| task_alpha(items, tasks[i], mode, config))
        .collect();

    let mut rows: Vec<TaskRow> = tasks
        .iter()
        .map(|t| TaskRow {
            task: t.to_string(),
            alpha_labels: None,
            alpha_overlap: None,
            alpha_overlap_sim: None,
            alpha_merged: None,
            metric: if *t == TYPE { "tailored" } else { "nominal" }.to_string(),
            absent: BTreeMap::new(),
        })
        .collect();
    for (&(i, mode), result) in cells.iter().zip(results) {
        match result {
            Ok(r) => rows[i].set(mode, r.alpha()),
            Err(e) => {
                rows[i]
                    .absent
                    .insert(mode.as_str().to_string(), e.to_string());
            }
        }
    }
    AgreementReport { header, rows }
}

/// Agreement over a store's multiply-annotated documents for one round.
pub fn store_report(
    store: &Store,
    round: RoundSelector,
    config: &AgreementConfig,
) -> Result<AgreementReport> {
    let annotations: Vec<_> = store
        .annotations(round)
        .into_iter()
        .map(|s| &s.annotation)
        .collect();
    let items = consensus_items(store.documents(), &annotations)?;
    Ok(agreement_report(
        &items,
        store.schema(),
        &round.to_string(),
        config,
    ))
}
