//! GDELT Global Knowledge Graph (2.1) export records.
//!
//! Only four columns are read: the record date (column 1), the document URL
//! (column 4), the themes (enhanced themes in column 8, falling back to the
//! plain theme list in column 7) and the translation info (column 25) from
//! which the source language is taken.

use std::io::{BufRead, BufReader, Read};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::Language;

const COL_DATE: usize = 1;
const COL_URL: usize = 4;
const COL_THEMES: usize = 7;
const COL_ENHANCED_THEMES: usize = 8;
const COL_TRANSLATION: usize = 25;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GdeltRecord {
    pub url: String,
    /// One entry per reference; a theme mentioned twice appears twice.
    pub themes: Vec<String>,
    /// ISO 639 code as reported by GDELT (`en` when untranslated).
    pub detected_language: String,
    pub record_date: NaiveDate,
}

impl GdeltRecord {
    pub fn language(&self) -> Option<Language> {
        Language::from_code(&self.detected_language)
    }
}

/// Parses one tab-separated export line.
pub fn parse_line(line: &str, line_no: usize) -> Result<GdeltRecord> {
    let cols: Vec<&str> = line.split('\t').collect();
    let err = |message: String| Error::Parse {
        line: line_no,
        message,
    };
    if cols.len() <= COL_ENHANCED_THEMES {
        return Err(err(format!(
            "expected at least {} columns, found {}",
            COL_ENHANCED_THEMES + 1,
            cols.len()
        )));
    }
    let url = cols[COL_URL].trim();
    if url.is_empty() {
        return Err(err("empty document identifier".to_string()));
    }
    let date_field = cols[COL_DATE].trim();
    let record_date = date_field
        .get(..8)
        .and_then(|d| NaiveDate::parse_from_str(d, "%Y%m%d").ok())
        .ok_or_else(|| err(format!("bad record date {date_field:?}")))?;

    let enhanced = cols[COL_ENHANCED_THEMES].trim();
    let themes: Vec<String> = if !enhanced.is_empty() {
        enhanced
            .split(';')
            .filter_map(|e| e.split(',').next())
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect()
    } else {
        cols[COL_THEMES]
            .split(';')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect()
    };

    let detected_language = cols
        .get(COL_TRANSLATION)
        .and_then(|info| {
            info.split(';')
                .find_map(|part| part.trim().strip_prefix("srclc:"))
                .map(|code| code.trim().to_string())
        })
        .filter(|c| !c.is_empty())
        .unwrap_or_else(|| "en".to_string());

    Ok(GdeltRecord {
        url: url.to_string(),
        themes,
        detected_language,
        record_date,
    })
}

/// Reads a whole export. Blank lines are ignored; any malformed line fails
/// the read with its line number.
pub fn read_export<R: Read>(reader: R) -> Result<Vec<GdeltRecord>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::io("<gdelt export>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_line(&line, i + 1)?);
    }
    Ok(out)
}

/// Builds a synthetic export line with the columns this module reads.
/// Useful for fixtures and tests.
pub fn format_line(id: &str, rec: &GdeltRecord) -> String {
    let mut cols = vec![String::new(); 27];
    cols[0] = id.to_string();
    cols[COL_DATE] = format!("{}000000", rec.record_date.format("%Y%m%d"));
    cols[COL_URL] = rec.url.clone();
    let mut distinct = rec.themes.clone();
    distinct.dedup();
    cols[COL_THEMES] = distinct.join(";");
    cols[COL_ENHANCED_THEMES] = rec
        .themes
        .iter()
        .enumerate()
        .map(|(i, t)| format!("{t},{}", i * 10))
        .collect::<Vec<_>>()
        .join(";");
    if rec.detected_language != "en" {
        cols[COL_TRANSLATION] = format!(
            "srclc:{};eng:GT-{} 1.0",
            rec.detected_language,
            rec.detected_language.to_uppercase()
        );
    }
    cols.join("\t")
}
