use std::collections::HashMap;
use std::hash::Hash;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase", tag = "outcome", content = "label")]
pub enum Majority<T> {
    Decided(T),
    Conflict,
}

impl<T> Majority<T> {
    pub fn decided(self) -> Option<T> {
        match self {
            Majority::Decided(t) => Some(t),
            Majority::Conflict => None,
        }
    }
}

/// A label wins only when it occurs strictly more often than every other
/// label. Ties and empty input are conflicts.
pub fn resolve_majority<T: Eq + Hash + Clone>(labels: &[T]) -> Majority<T> {
    let mut counts: HashMap<&T, usize> = HashMap::new();
    for l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let Some(best) = counts.values().copied().max() else {
        return Majority::Conflict;
    };
    let mut winners = counts.iter().filter(|(_, c)| **c == best);
    match (winners.next(), winners.next()) {
        (Some((label, _)), None) => Majority::Decided((*label).clone()),
        _ => Majority::Conflict,
    }
}
