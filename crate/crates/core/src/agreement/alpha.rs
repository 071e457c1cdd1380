//! Krippendorff's alpha over a coincidence matrix.
//!
//! For every unit with `m_u >= 2` pairable values, each ordered pair of
//! values from different coders adds `1 / (m_u - 1)` to `o[c][k]`. With
//! marginals `n_c` and total `n`:
//!
//! ```text
//! D_o = sum_ck o[c][k] * d(c,k) / n
//! D_e = sum_ck n_c * n_k * d(c,k) / (n * (n - 1))
//! alpha = 1 - D_o / D_e
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::distance::Distance;
use crate::error::{Error, Result};

/// One unit of analysis: a value per coder, `None` where the coder gave none.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unit {
    pub id: String,
    pub values: Vec<Option<String>>,
}

impl Unit {
    pub fn new<S: Into<String>>(
        id: impl Into<String>,
        values: impl IntoIterator<Item = Option<S>>,
    ) -> Self {
        Unit {
            id: id.into(),
            values: values.into_iter().map(|v| v.map(Into::into)).collect(),
        }
    }

    pub fn pairable(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityData {
    pub units: Vec<Unit>,
    pub distance: Distance,
}

impl ReliabilityData {
    pub fn new(distance: Distance) -> Self {
        ReliabilityData {
            units: Vec::new(),
            distance,
        }
    }

    pub fn push(&mut self, unit: Unit) {
        self.units.push(unit);
    }

    /// Builds nominal data from rows of `Option<&str>` (one row per unit).
    pub fn from_rows(distance: Distance, rows: &[Vec<Option<&str>>]) -> Self {
        ReliabilityData {
            units: rows
                .iter()
                .enumerate()
                .map(|(i, r)| Unit::new(format!("u{i}"), r.iter().copied()))
                .collect(),
            distance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceSummary {
    /// Value domain in sorted order; indexes the matrix and marginals.
    pub values: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
    pub marginals: Vec<f64>,
    pub n_total: f64,
    pub observed_disagreement: f64,
    pub expected_disagreement: f64,
    pub alpha: f64,
    /// Expected disagreement is zero; alpha is reported as 1.
    pub degenerate: bool,
    pub units_used: usize,
}

pub fn alpha(data: &ReliabilityData) -> Result<CoincidenceSummary> {
    let retained: Vec<&Unit> = data.units.iter().filter(|u| u.pairable() >= 2).collect();
    if retained.is_empty() {
        return Err(Error::NoEligibleUnits(
            "alpha: no unit has two values".to_string(),
        ));
    }

    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for u in &retained {
        for v in u.values.iter().flatten() {
            index.entry(v.as_str()).or_insert(0);
        }
    }
    for (i, slot) in index.values_mut().enumerate() {
        *slot = i;
    }
    let k = index.len();
    let values: Vec<String> = index.keys().map(|s| s.to_string()).collect();

    let mut delta = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            delta[i][j] = data.distance.distance(&values[i], &values[j])?;
        }
    }

    let mut matrix = vec![vec![0.0; k]; k];
    for u in &retained {
        let idx: Vec<usize> = u
            .values
            .iter()
            .flatten()
            .map(|v| index[v.as_str()])
            .collect();
        let weight = 1.0 / (idx.len() as f64 - 1.0);
        for (a, &c) in idx.iter().enumerate() {
            for (b, &d) in idx.iter().enumerate() {
                if a != b {
                    matrix[c][d] += weight;
                }
            }
        }
    }

    let marginals: Vec<f64> = matrix.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = marginals.iter().sum();
    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..k {
        for d in 0..k {
            observed += matrix[c][d] * delta[c][d];
            expected += marginals[c] * marginals[d] * delta[c][d];
        }
    }
    observed /= n;
    expected /= n * (n - 1.0);

    let degenerate = expected <= 0.0;
    let alpha = if degenerate {
        1.0
    } else {
        1.0 - observed / expected
    };
    Ok(CoincidenceSummary {
        values,
        matrix,
        marginals,
        n_total: n,
        observed_disagreement: observed,
        expected_disagreement: expected,
        alpha,
        degenerate,
        units_used: retained.len(),
    })
}
