use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use super::gdelt::GdeltRecord;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThemeCount {
    /// Total references, counting repeated mentions within one document.
    pub refs_count: u64,
    /// Documents mentioning the theme at least once.
    pub docs_count: u64,
}

impl AddAssign for ThemeCount {
    fn add_assign(&mut self, rhs: Self) {
        self.refs_count += rhs.refs_count;
        self.docs_count += rhs.docs_count;
    }
}

/// Per-theme reference and document counts.
///
/// `total.refs_count` is the column sum of references. `total.docs_count`
/// counts distinct documents carrying any tracked theme, so it is at most
/// the column sum of per-theme document counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThemeStats {
    pub themes: BTreeMap<String, ThemeCount>,
    pub total: ThemeCount,
}

impl ThemeStats {
    pub fn from_json(json: &str) -> crate::Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    /// Internal consistency problems, empty when the table is coherent.
    pub fn check(&self) -> Vec<String> {
        let mut problems = Vec::new();
        for (theme, c) in &self.themes {
            if c.docs_count > c.refs_count {
                problems.push(format!(
                    "{theme}: docs {} > refs {}",
                    c.docs_count, c.refs_count
                ));
            }
        }
        let refs: u64 = self.themes.values().map(|c| c.refs_count).sum();
        let docs_sum: u64 = self.themes.values().map(|c| c.docs_count).sum();
        let docs_max = self
            .themes
            .values()
            .map(|c| c.docs_count)
            .max()
            .unwrap_or(0);
        if refs != self.total.refs_count {
            problems.push(format!(
                "total refs {} != column sum {refs}",
                self.total.refs_count
            ));
        }
        if self.total.docs_count > docs_sum || self.total.docs_count < docs_max {
            problems.push(format!(
                "total docs {} outside [{docs_max}, {docs_sum}]",
                self.total.docs_count
            ));
        }
        problems
    }

    /// Plain-text table, one theme per row.
    pub fn render(&self) -> String {
        let width = self
            .themes
            .keys()
            .map(|k| k.chars().count())
            .max()
            .unwrap_or(5)
            .max(5);
        let mut out = format!("{:<width$}  {:>10}  {:>10}\n", "Theme", "#refs", "#docs");
        for (theme, c) in &self.themes {
            out += &format!(
                "{theme:<width$}  {:>10}  {:>10}\n",
                c.refs_count, c.docs_count
            );
        }
        out += &format!(
            "{:<width$}  {:>10}  {:>10}\n",
            "Total", self.total.refs_count, self.total.docs_count
        );
        out
    }
}

impl AddAssign<&ThemeStats> for ThemeStats {
    fn add_assign(&mut self, rhs: &ThemeStats) {
        for (theme, c) in &rhs.themes {
            *self.themes.entry(theme.clone()).or_default() += *c;
        }
        self.total += rhs.total;
    }
}

/// Counts references and documents per theme. With `tracked`, only those
/// themes are counted; otherwise every theme seen is.
pub fn theme_stats<'a, I>(records: I, tracked: Option<&BTreeSet<String>>) -> ThemeStats
where
    I: IntoIterator<Item = &'a GdeltRecord>,
{
    let mut stats = ThemeStats::default();
    for rec in records {
        let mut seen = HashSet::new();
        for theme in &rec.themes {
            if tracked.is_some_and(|t| !t.contains(theme)) {
                continue;
            }
            let entry = stats.themes.entry(theme.clone()).or_default();
            entry.refs_count += 1;
            stats.total.refs_count += 1;
            if seen.insert(theme.as_str()) {
                entry.docs_count += 1;
            }
        }
        if !seen.is_empty() {
            stats.total.docs_count += 1;
        }
    }
    stats
}
