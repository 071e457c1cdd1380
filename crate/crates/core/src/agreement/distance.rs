use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::schema::DocType;

/// Separator for set-valued labels such as a Fact-Type selection.
pub const SET_SEPARATOR: char = '|';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distance {
    /// 0 for equal values, 1 otherwise.
    Nominal,
    /// Document Type metric where Both is compatible with News and Summary.
    TailoredType,
    /// Set-valued labels joined by `|`: 0 when the sets share an element
    /// (or are both empty), 1 otherwise.
    SetIntersection,
}

impl Distance {
    pub fn name(self) -> &'static str {
        match self {
            Distance::Nominal => "nominal",
            Distance::TailoredType => "tailored-type",
            Distance::SetIntersection => "set-intersection",
        }
    }

    pub fn distance(self, a: &str, b: &str) -> Result<f64> {
        Ok(match self {
            Distance::Nominal => nominal(a, b),
            Distance::TailoredType => tailored_type_distance(a.parse()?, b.parse()?),
            Distance::SetIntersection => {
                let sa = split_set(a);
                let sb = split_set(b);
                if (sa.is_empty() && sb.is_empty()) || !sa.is_disjoint(&sb) {
                    0.0
                } else {
                    1.0
                }
            }
        })
    }
}

fn nominal(a: &str, b: &str) -> f64 {
    if a == b {
        0.0
    } else {
        1.0
    }
}

pub fn tailored_type_distance(x: DocType, y: DocType) -> f64 {
    use DocType::*;
    match (x, y) {
        _ if x == y => 0.0,
        (Both, News) | (News, Both) | (Both, Summary) | (Summary, Both) => 0.0,
        _ => 1.0,
    }
}

pub fn join_set<'a>(items: impl IntoIterator<Item = &'a String>) -> String {
    let sorted: BTreeSet<&str> = items.into_iter().map(|s| s.as_str()).collect();
    sorted
        .into_iter()
        .collect::<Vec<_>>()
        .join(&SET_SEPARATOR.to_string())
}

pub fn split_set(value: &str) -> BTreeSet<&str> {
    value
        .split(SET_SEPARATOR)
        .filter(|s| !s.is_empty())
        .collect()
}
