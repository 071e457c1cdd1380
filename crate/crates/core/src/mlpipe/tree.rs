//! Least-squares regression trees over sparse non-negative features.

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;

use super::features::FeatureMatrix;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub(crate) fn predict(&self, row: &[(usize, f64)]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf(v) => return *v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let x = row
                        .binary_search_by_key(feature, |e| e.0)
                        .map_or(0.0, |i| row[i].1);
                    at = if x <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeParams {
    pub max_depth: Option<usize>,
    /// Features drawn per node; all when `None`.
    pub max_features: Option<usize>,
}

struct Builder<'a> {
    x: &'a FeatureMatrix,
    targets: &'a [f64],
    params: TreeParams,
    leaf_value: &'a dyn Fn(&[usize]) -> f64,
    multiplicity: Vec<u32>,
    candidate: Vec<bool>,
    nodes: Vec<Node>,
}

/// Grows a tree on `samples` (row indices, repeats allowed for bootstrap
/// draws). Splits maximize the reduction in squared error of `targets`;
/// leaves take `leaf_value` of the rows that reach them.
pub(crate) fn grow(
    x: &FeatureMatrix,
    targets: &[f64],
    samples: Vec<usize>,
    params: TreeParams,
    leaf_value: &dyn Fn(&[usize]) -> f64,
    rng: &mut ChaCha8Rng,
) -> Tree {
    let mut b = Builder {
        x,
        targets,
        params,
        leaf_value,
        multiplicity: vec![0; x.n_rows()],
        candidate: vec![false; x.n_cols],
        nodes: Vec::new(),
    };
    b.build(samples, 0, rng);
    Tree { nodes: b.nodes }
}

impl Builder<'_> {
    fn build(&mut self, samples: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf(0.0));
        let split = if self.params.max_depth.is_some_and(|m| depth >= m) {
            None
        } else {
            self.best_split(&samples, rng)
        };
        match split {
            None => {
                self.nodes[at] = Node::Leaf((self.leaf_value)(&samples));
            }
            Some((feature, threshold)) => {
                let (l, r): (Vec<usize>, Vec<usize>) = samples
                    .into_iter()
                    .partition(|&i| self.x.get(i, feature) <= threshold);
                let left = self.build(l, depth + 1, rng);
                let right = self.build(r, depth + 1, rng);
                self.nodes[at] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
            }
        }
        at
    }

    fn best_split(&mut self, samples: &[usize], rng: &mut ChaCha8Rng) -> Option<(usize, f64)> {
        let n = samples.len() as f64;
        if samples.len() < 2 {
            return None;
        }
        let total: f64 = samples.iter().map(|&i| self.targets[i]).sum();
        let first = self.targets[samples[0]];
        if samples.iter().all(|&i| self.targets[i] == first) {
            return None;
        }

        let d = self.x.n_cols;
        let drawn: Vec<usize> = match self.params.max_features {
            Some(k) if k < d => {
                let mut v = sample(rng, d, k).into_vec();
                v.sort_unstable();
                v
            }
            _ => (0..d).collect(),
        };
        for &f in &drawn {
            self.candidate[f] = true;
        }

        let mut unique = Vec::new();
        for &i in samples {
            if self.multiplicity[i] == 0 {
                unique.push(i);
            }
            self.multiplicity[i] += 1;
        }
        // (feature, value, weight, weighted target) for non-zero entries.
        let mut entries: Vec<(usize, f64, f64, f64)> = Vec::new();
        for &i in &unique {
            let m = self.multiplicity[i] as f64;
            for &(f, v) in &self.x.rows[i] {
                if self.candidate[f] && v != 0.0 {
                    entries.push((f, v, m, m * self.targets[i]));
                }
            }
        }
        for &i in &unique {
            self.multiplicity[i] = 0;
        }
        for &f in &drawn {
            self.candidate[f] = false;
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

        let base = total * total / n;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut start = 0;
        while start < entries.len() {
            let f = entries[start].0;
            let mut end = start;
            while end < entries.len() && entries[end].0 == f {
                end += 1;
            }
            let group = &entries[start..end];
            let nz_n: f64 = group.iter().map(|e| e.2).sum();
            let nz_s: f64 = group.iter().map(|e| e.3).sum();
            let (mut left_n, mut left_s) = (n - nz_n, total - nz_s);
            let mut prev = 0.0;
            let mut k = 0;
            while k < group.len() {
                let v = group[k].1;
                if left_n > 0.0 && left_n < n {
                    let right_n = n - left_n;
                    let right_s = total - left_s;
                    let gain = left_s * left_s / left_n + right_s * right_s / right_n - base;
                    if gain > 1e-12 && best.is_none_or(|b| gain > b.0) {
                        best = Some((gain, f, 0.5 * (prev + v)));
                    }
                }
                while k < group.len() && group[k].1 == v {
                    left_n += group[k].2;
                    left_s += group[k].3;
                    k += 1;
                }
                prev = v;
            }
            start = end;
        }
        best.map(|(_, f, t)| (f, t))
    }
}
