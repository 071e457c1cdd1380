use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Project;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssignmentStatus {
    Pending,
    Submitted,
    Reviewed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub document_id: String,
    pub annotator_id: String,
    pub status: AssignmentStatus,
}

/// Number of consensus documents for `n_docs` at `fraction`, rounding up.
pub fn consensus_count(n_docs: usize, fraction: f64) -> usize {
    // Guard against 0.2 * 200 landing a hair above 40.
    let raw = fraction * n_docs as f64;
    let rounded = raw.round();
    let k = if (raw - rounded).abs() < 1e-9 {
        rounded
    } else {
        raw.ceil()
    };
    (k.max(0.0) as usize).min(n_docs)
}

/// Distributes documents over annotators.
///
/// A seeded shuffle picks the consensus subset (the first
/// `consensus_count` documents of the shuffled order); each consensus
/// document then takes the next `annotators_per_consensus_doc` annotators
/// of a round-robin over a seeded shuffle of the team, and every other
/// document takes the next single annotator. Loads differ by at most one.
pub fn assign(project: &Project, document_ids: &[String], seed: u64) -> Result<Vec<Assignment>> {
    project.check()?;
    let team = project.annotators.len();
    let consensus = consensus_count(document_ids.len(), project.consensus_fraction);
    let arity = project.annotators_per_consensus_doc;
    if team == 0 {
        return Err(Error::NotEnoughAnnotators {
            needed: 1,
            available: 0,
        });
    }
    if consensus > 0 && arity > team {
        return Err(Error::NotEnoughAnnotators {
            needed: arity,
            available: team,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..document_ids.len()).collect();
    order.shuffle(&mut rng);
    let mut annotators = project.annotators.clone();
    annotators.shuffle(&mut rng);

    let mut out = Vec::with_capacity(consensus * arity + document_ids.len() - consensus);
    let mut cursor = 0usize;
    for (rank, &doc) in order.iter().enumerate() {
        let copies = if rank < consensus { arity } else { 1 };
        for _ in 0..copies {
            out.push(Assignment {
                document_id: document_ids[doc].clone(),
                annotator_id: annotators[cursor % team].clone(),
                status: AssignmentStatus::Pending,
            });
            cursor += 1;
        }
    }
    Ok(out)
}
