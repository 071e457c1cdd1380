use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::error::Error;

pub const RELEVANCE: &str = "Relevance";
pub const TYPE: &str = "Type";
pub const FACT: &str = "Fact";
pub const CAUSE: &str = "Cause";
pub const QUANTITY: &str = "Quantity";
pub const LOCATION_ORIGIN: &str = "Location Origin";
pub const LOCATION_DESTINATION: &str = "Location Destination";
pub const DATE: &str = "Date";
pub const COMPLEX_EVENT: &str = "Complex Event";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Fr,
    Es,
}

impl Language {
    /// Maps ISO 639-1 / 639-2 codes (as found in GDELT translation info).
    pub fn from_code(code: &str) -> Option<Self> {
        match code.trim().to_ascii_lowercase().as_str() {
            "en" | "eng" => Some(Language::En),
            "fr" | "fra" | "fre" => Some(Language::Fr),
            "es" | "spa" => Some(Language::Es),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dataset {
    KiliEn,
    KiliFr,
    KiliEs,
    AmazonSm,
    AmazonMt,
    Custom,
}

/// One news article.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub url: String,
    pub language: Language,
    pub publication_date: NaiveDate,
    pub text: String,
    #[serde(default)]
    pub themes: BTreeSet<String>,
    pub dataset: Dataset,
}

macro_rules! label_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.trim() {
                    $($text => Ok($name::$variant),)+
                    other => Err(Error::UnknownLabel {
                        context: stringify!($name),
                        label: other.to_string(),
                    }),
                }
            }
        }
    };
}

label_enum!(
    /// Document-level relevance verdict.
    Relevance {
        Relevant => "Relevant",
        NotRelevant => "Not Relevant",
        NotApplicable => "N/A",
    }
);

label_enum!(
    /// Document-level article type.
    DocType {
        News => "News",
        Summary => "Summary",
        Both => "Both",
        NotApplicable => "N/A",
    }
);

impl Relevance {
    /// Not Relevant and N/A both unlock the skip rule.
    pub fn allows_skip(self) -> bool {
        !matches!(self, Relevance::Relevant)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Round {
    Initial,
    Review,
}

impl fmt::Display for Round {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Round::Initial => "initial",
            Round::Review => "review",
        })
    }
}

impl FromStr for Round {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "initial" => Ok(Round::Initial),
            "review" => Ok(Round::Review),
            other => Err(Error::InvalidArgument(format!("unknown round {other:?}"))),
        }
    }
}

/// A labeled text span. Offsets are code points, half-open.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanLabel {
    pub id: String,
    pub task: String,
    pub label: String,
    pub start: usize,
    pub end: usize,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub fact_types: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count_value: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count_qualifier: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date_value: Option<String>,
}

impl SpanLabel {
    pub fn new(
        id: impl Into<String>,
        task: impl Into<String>,
        label: impl Into<String>,
        start: usize,
        end: usize,
    ) -> Self {
        SpanLabel {
            id: id.into(),
            task: task.into(),
            label: label.into(),
            start,
            end,
            fact_types: BTreeSet::new(),
            count_value: None,
            count_qualifier: None,
            date_value: None,
        }
    }

    pub fn with_fact_types<I, S>(mut self, types: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.fact_types = types.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_count(mut self, value: u64, qualifier: Option<&str>) -> Self {
        self.count_value = Some(value);
        self.count_qualifier = qualifier.map(str::to_string);
        self
    }

    pub fn with_date(mut self, date: impl Into<String>) -> Self {
        self.date_value = Some(date.into());
        self
    }

    pub fn is_fact(&self) -> bool {
        self.task == FACT
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Directed link from a Fact span to one of its attributes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relation {
    pub source: String,
    pub target: String,
}

impl Relation {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        Relation {
            source: source.into(),
            target: target.into(),
        }
    }
}

/// One annotator's complete labeling of one document.
///
/// The two classification verdicts are optional at the type level so that
/// incomplete submissions can be parsed and reported rather than rejected
/// by the deserializer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub document_id: String,
    pub annotator_id: String,
    #[serde(default)]
    pub relevance: Option<Relevance>,
    #[serde(default)]
    pub doc_type: Option<DocType>,
    #[serde(default)]
    pub spans: Vec<SpanLabel>,
    #[serde(default)]
    pub relations: Vec<Relation>,
    pub round: Round,
    pub submitted_at: DateTime<Utc>,
}

impl Annotation {
    pub fn new(
        document_id: impl Into<String>,
        annotator_id: impl Into<String>,
        relevance: Relevance,
        doc_type: DocType,
    ) -> Self {
        Annotation {
            document_id: document_id.into(),
            annotator_id: annotator_id.into(),
            relevance: Some(relevance),
            doc_type: Some(doc_type),
            spans: Vec::new(),
            relations: Vec::new(),
            round: Round::Initial,
            submitted_at: DateTime::<Utc>::UNIX_EPOCH,
        }
    }

    pub fn with_span(mut self, span: SpanLabel) -> Self {
        self.spans.push(span);
        self
    }

    pub fn with_relation(mut self, source: &str, target: &str) -> Self {
        self.relations.push(Relation::new(source, target));
        self
    }

    pub fn with_round(mut self, round: Round) -> Self {
        self.round = round;
        self
    }

    pub fn spans_for<'a>(&'a self, task: &'a str) -> impl Iterator<Item = &'a SpanLabel> + 'a {
        self.spans.iter().filter(move |s| s.task == task)
    }

    pub fn span(&self, id: &str) -> Option<&SpanLabel> {
        self.spans.iter().find(|s| s.id == id)
    }
}
