use std::collections::HashSet;

use chrono::Datelike;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::schema::Document;

/// Uniform sample without replacement of `n` documents published in `year`.
///
/// Documents sharing an id count once (first occurrence wins). The result
/// depends only on the input order, `n` and `seed`.
pub fn sample_period(docs: &[Document], year: i32, n: usize, seed: u64) -> Result<Vec<Document>> {
    let mut seen = HashSet::new();
    let population: Vec<&Document> = docs
        .iter()
        .filter(|d| d.publication_date.year() == year)
        .filter(|d| seen.insert(d.id.as_str()))
        .collect();
    if n > population.len() {
        return Err(Error::InsufficientPopulation {
            requested: n,
            available: population.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, population.len(), n).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| population[i].clone()).collect())
}
