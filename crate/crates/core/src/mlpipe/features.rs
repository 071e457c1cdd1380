use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::tokens;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NgramConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub min_df: usize,
}

impl Default for NgramConfig {
    fn default() -> Self {
        NgramConfig {
            n_min: 1,
            n_max: 5,
            min_df: 5,
        }
    }
}

/// Word n-grams over lowercased tokens, shortest first, in text order.
pub fn extract_ngrams(text: &str, n_min: usize, n_max: usize) -> Vec<String> {
    let toks = tokens(text);
    let mut out = Vec::new();
    for n in n_min.max(1)..=n_max {
        if n > toks.len() {
            break;
        }
        for w in toks.windows(n) {
            out.push(w.join(" "));
        }
    }
    out
}

/// Retained n-grams with their document frequencies in the fitting corpus.
/// Columns are ordered by term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Vocabulary {
    pub terms: Vec<String>,
    pub document_frequency: Vec<usize>,
    pub n_documents: usize,
    pub config: NgramConfig,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Vocabulary {
    fn build(df: BTreeMap<String, usize>, n_documents: usize, config: NgramConfig) -> Result<Self> {
        let kept: Vec<(String, usize)> = df
            .into_iter()
            .filter(|(_, d)| *d >= config.min_df)
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocabulary {
                min_df: config.min_df,
            });
        }
        let index = kept
            .iter()
            .enumerate()
            .map(|(i, (t, _))| (t.clone(), i))
            .collect();
        let (terms, document_frequency) = kept.into_iter().unzip();
        Ok(Vocabulary {
            terms,
            document_frequency,
            n_documents,
            config,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// Smoothed inverse document frequency `ln((1 + N) / (1 + df)) + 1`.
    pub fn idf(&self, column: usize) -> f64 {
        let n = self.n_documents as f64;
        ((1.0 + n) / (1.0 + self.document_frequency[column] as f64)).ln() + 1.0
    }
}

/// Sparse row-major matrix; each row holds `(column, value)` sorted by column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub n_cols: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let r = &self.rows[row];
        r.binary_search_by_key(&col, |e| e.0)
            .map_or(0.0, |i| r[i].1)
    }

    pub fn select(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            n_cols: self.n_cols,
            rows: rows.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Column-major copy: for each column, `(row, value)` sorted by row.
    pub fn columns(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols = vec![Vec::new(); self.n_cols];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                cols[c].push((r, v));
            }
        }
        cols
    }
}

/// Corpus with n-grams counted once per document, so that vocabularies can
/// be refit on any subset (a training fold) without re-tokenizing.
#[derive(Debug, Clone)]
pub struct CountedCorpus {
    config: NgramConfig,
    terms: Vec<String>,
    docs: Vec<Vec<(u32, u32)>>,
}

impl CountedCorpus {
    pub fn new<S: AsRef<str>>(texts: &[S], config: NgramConfig) -> Self {
        let mut ids: HashMap<String, u32> = HashMap::new();
        let mut terms = Vec::new();
        let docs = texts
            .iter()
            .map(|t| {
                let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
                for g in extract_ngrams(t.as_ref(), config.n_min, config.n_max) {
                    let id = *ids.entry(g).or_insert_with_key(|k| {
                        terms.push(k.clone());
                        (terms.len() - 1) as u32
                    });
                    *counts.entry(id).or_default() += 1;
                }
                counts.into_iter().collect()
            })
            .collect();
        CountedCorpus {
            config,
            terms,
            docs,
        }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn config(&self) -> NgramConfig {
        self.config
    }

    /// Vocabulary fitted on the documents at `subset` only.
    pub fn fit(&self, subset: &[usize]) -> Result<Vocabulary> {
        if subset.is_empty() {
            return Err(Error::InvalidArgument(
                "cannot fit a vocabulary on no documents".into(),
            ));
        }
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for &d in subset {
            for &(id, _) in &self.docs[d] {
                *df.entry(self.terms[id as usize].clone()).or_default() += 1;
            }
        }
        Vocabulary::build(df, subset.len(), self.config)
    }

    /// Tf-idf rows for the documents at `subset`, L2-normalized.
    pub fn transform(&self, vocab: &Vocabulary, subset: &[usize]) -> FeatureMatrix {
        let rows = subset
            .iter()
            .map(|&d| {
                let mut row: Vec<(usize, f64)> = self.docs[d]
                    .iter()
                    .filter_map(|&(id, tf)| {
                        vocab
                            .column(&self.terms[id as usize])
                            .map(|c| (c, tf as f64 * vocab.idf(c)))
                    })
                    .collect();
                row.sort_by_key(|e| e.0);
                normalize(&mut row);
                row
            })
            .collect();
        FeatureMatrix {
            n_cols: vocab.len(),
            rows,
        }
    }
}

fn normalize(row: &mut [(usize, f64)]) {
    let norm = row.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
    if norm > 0.0 {
        for e in row.iter_mut() {
            e.1 /= norm;
        }
    }
}

pub fn fit_vocabulary<S: AsRef<str>>(corpus: &[S], config: NgramConfig) -> Result<Vocabulary> {
    let counted = CountedCorpus::new(corpus, config);
    counted.fit(&(0..corpus.len()).collect::<Vec<_>>())
}

pub fn transform_tfidf<S: AsRef<str>>(vocab: &Vocabulary, corpus: &[S]) -> FeatureMatrix {
    let counted = CountedCorpus::new(corpus, vocab.config);
    counted.transform(vocab, &(0..corpus.len()).collect::<Vec<_>>())
}
