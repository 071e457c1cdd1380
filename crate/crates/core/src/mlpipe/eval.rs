use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{CountedCorpus, NgramConfig};
use super::labels::LabeledSet;
use super::metrics::roc_auc;
use super::model::{fit_classifier, predict_scores, ClassifierKind, Hyperparams};
use crate::error::{Error, Result};
use crate::schema::Document;

/// Description of the feature weighting, echoed in reports.
pub const TFIDF_SCHEME: &str = "raw tf x smoothed idf ln((1+N)/(1+df))+1, rows L2-normalized";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub splits: usize,
    pub test_fraction: f64,
    pub folds: usize,
    pub seed: u64,
    pub ngram: NgramConfig,
    /// Overrides the classifier's default grid when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<Hyperparams>>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            splits: 50,
            test_fraction: 0.2,
            folds: 10,
            seed: 7,
            ngram: NgramConfig::default(),
            grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub index: usize,
    pub validation_auc: f64,
    pub test_auc: f64,
    pub c: f64,
    pub vocabulary_size: usize,
    pub train_size: usize,
    pub test_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub classifier: ClassifierKind,
    pub validation_auc: f64,
    pub test_auc: f64,
    pub splits: usize,
    pub seed: u64,
    pub folds: usize,
    pub test_fraction: f64,
    pub documents: usize,
    pub positives: usize,
    pub features: String,
    pub ngram: NgramConfig,
    pub per_split: Vec<SplitMetrics>,
}

impl EvalResult {
    /// Writes one CSV row per split.
    pub fn write_split_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "classifier",
            "split",
            "validation_auc",
            "test_auc",
            "c",
            "vocabulary_size",
            "train_size",
            "test_size",
        ])?;
        for s in &self.per_split {
            w.write_record([
                self.classifier.as_str().to_string(),
                s.index.to_string(),
                s.validation_auc.to_string(),
                s.test_auc.to_string(),
                s.c.to_string(),
                s.vocabulary_size.to_string(),
                s.train_size.to_string(),
                s.test_size.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("csv output", e))?;
        Ok(())
    }
}

/// Assigns sample indices to `k` folds, dealing each class round-robin
/// after a seeded shuffle. Returns the held-out indices of each fold.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut cursor = 0;
    for class in [true, false] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(Error::FoldDegeneracy {
                folds: k,
                smallest: members.len(),
            });
        }
        members.shuffle(&mut rng);
        for i in members {
            folds[cursor % k].push(i);
            cursor += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Seeded per-class split; each class keeps at least one sample on each side.
pub fn stratified_split(
    labels: &[bool],
    test_fraction: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&test_fraction) || test_fraction == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "test fraction {test_fraction} outside (0, 1)"
        )));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [true, false] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < 2 {
            return Err(Error::FoldDegeneracy {
                folds: 2,
                smallest: members.len(),
            });
        }
        members.shuffle(rng);
        let n_test =
            ((members.len() as f64 * test_fraction).round() as usize).clamp(1, members.len() - 1);
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Fits on `train` and scores `test`, with the vocabulary built from
/// `train` only. Indices refer to `corpus` and `labels`.
fn fit_and_score(
    kind: ClassifierKind,
    params: &Hyperparams,
    corpus: &CountedCorpus,
    labels: &[bool],
    train: &[usize],
    test: &[usize],
    seed: u64,
) -> Result<(f64, usize)> {
    let vocab = corpus.fit(train)?;
    let x_train = corpus.transform(&vocab, train);
    let y_train: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
    let model = fit_classifier(kind, &x_train, &y_train, params, seed)?;
    let x_test = corpus.transform(&vocab, test);
    let y_test: Vec<bool> = test.iter().map(|&i| labels[i]).collect();
    Ok((
        roc_auc(&predict_scores(&model, &x_test), &y_test)?,
        vocab.len(),
    ))
}

/// Mean held-out AUC over stratified folds of `subset`. Each fold refits
/// the vocabulary on its own training part.
pub fn cross_validate_subset(
    kind: ClassifierKind,
    params: &Hyperparams,
    corpus: &CountedCorpus,
    labels: &[bool],
    subset: &[usize],
    k: usize,
    seed: u64,
) -> Result<f64> {
    let sub_labels: Vec<bool> = subset.iter().map(|&i| labels[i]).collect();
    let folds = stratified_folds(&sub_labels, k, seed)?;
    let mut total = 0.0;
    for (f, held) in folds.iter().enumerate() {
        let test: Vec<usize> = held.iter().map(|&j| subset[j]).collect();
        let mut in_fold = vec![false; subset.len()];
        for &j in held {
            in_fold[j] = true;
        }
        let train: Vec<usize> = (0..subset.len())
            .filter(|&j| !in_fold[j])
            .map(|j| subset[j])
            .collect();
        total += fit_and_score(kind, params, corpus, labels, &train, &test, seed ^ f as u64)?.0;
    }
    Ok(total / k as f64)
}

/// Stratified k-fold validation AUC with default hyperparameters.
pub fn cross_validate<S: AsRef<str>>(
    kind: ClassifierKind,
    texts: &[S],
    labels: &[bool],
    k: usize,
    seed: u64,
    ngram: NgramConfig,
) -> Result<f64> {
    let corpus = CountedCorpus::new(texts, ngram);
    let all: Vec<usize> = (0..texts.len()).collect();
    cross_validate_subset(
        kind,
        &Hyperparams::default(),
        &corpus,
        labels,
        &all,
        k,
        seed,
    )
}

fn run_split(
    kind: ClassifierKind,
    corpus: &CountedCorpus,
    labels: &[bool],
    config: &EvalConfig,
    grid: &[Hyperparams],
    index: usize,
) -> Result<SplitMetrics> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let (train, test) = stratified_split(labels, config.test_fraction, &mut rng)?;
    let cv_seed: u64 = rng.random();
    let model_seed: u64 = rng.random();
    let mut best: Option<(f64, &Hyperparams)> = None;
    for params in grid {
        let score =
            cross_validate_subset(kind, params, corpus, labels, &train, config.folds, cv_seed)?;
        if best.is_none_or(|b| score > b.0) {
            best = Some((score, params));
        }
    }
    let (validation_auc, params) =
        best.ok_or_else(|| Error::InvalidArgument("empty hyperparameter grid".into()))?;
    let (test_auc, vocabulary_size) =
        fit_and_score(kind, params, corpus, labels, &train, &test, model_seed)?;
    Ok(SplitMetrics {
        index,
        validation_auc,
        test_auc,
        c: params.c,
        vocabulary_size,
        train_size: train.len(),
        test_size: test.len(),
    })
}

/// Repeated stratified train/test evaluation. Every split tunes on its
/// training part by k-fold validation, then scores its test part. Split
/// `i` draws from stream `i` of a generator seeded with `config.seed`, so
/// results do not depend on the order splits run in.
pub fn evaluate_texts<S: AsRef<str> + Sync>(
    kind: ClassifierKind,
    texts: &[S],
    labels: &[bool],
    config: &EvalConfig,
) -> Result<EvalResult> {
    if texts.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} texts but {} labels",
            texts.len(),
            labels.len()
        )));
    }
    if config.splits == 0 {
        return Err(Error::InvalidArgument("need at least one split".into()));
    }
    let corpus = CountedCorpus::new(texts, config.ngram);
    let grid = config.grid.clone().unwrap_or_else(|| kind.grid());
    let per_split: Vec<SplitMetrics> = (0..config.splits)
        .into_par_iter()
        .map(|i| run_split(kind, &corpus, labels, config, &grid, i))
        .collect::<Result<_>>()?;
    let n = per_split.len() as f64;
    Ok(EvalResult {
        classifier: kind,
        validation_auc: per_split.iter().map(|s| s.validation_auc).sum::<f64>() / n,
        test_auc: per_split.iter().map(|s| s.test_auc).sum::<f64>() / n,
        splits: config.splits,
        seed: config.seed,
        folds: config.folds,
        test_fraction: config.test_fraction,
        documents: labels.len(),
        positives: labels.iter().filter(|l| **l).count(),
        features: TFIDF_SCHEME.to_string(),
        ngram: config.ngram,
        per_split,
    })
}

/// Evaluates on the documents of a labeled set.
pub fn evaluate(
    kind: ClassifierKind,
    documents: &[Document],
    labeled: &LabeledSet,
    config: &EvalConfig,
) -> Result<EvalResult> {
    let by_id: HashMap<&str, &str> = documents
        .iter()
        .map(|d| (d.id.as_str(), d.text.as_str()))
        .collect();
    let texts = labeled
        .document_ids
        .iter()
        .map(|id| {
            by_id
                .get(id.as_str())
                .copied()
                .ok_or_else(|| Error::DocumentNotFound(id.clone()))
        })
        .collect::<Result<Vec<&str>>>()?;
    evaluate_texts(kind, &texts, &labeled.labels, config)
}

/// One task's results for several classifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlReport {
    pub task: String,
    pub config: EvalConfig,
    pub features: String,
    pub rows: Vec<EvalResult>,
}

impl MlReport {
    pub fn render(&self) -> String {
        let c = &self.config;
        let mut out = format!(
            "task={} splits={} folds={} test-fraction={} seed={} ngrams={}..{} min-df={}\n",
            self.task,
            c.splits,
            c.folds,
            c.test_fraction,
            c.seed,
            c.ngram.n_min,
            c.ngram.n_max,
            c.ngram.min_df
        );
        let _ = writeln!(
            out,
            "{:<26}  {:>10}  {:>8}",
            "classifier", "validation", "test"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<26}  {:>10.3}  {:>8.3}",
                r.classifier.display_name(),
                r.validation_auc,
                r.test_auc
            );
        }
        out
    }
}

pub fn evaluate_all(
    kinds: &[ClassifierKind],
    documents: &[Document],
    labeled: &LabeledSet,
    config: &EvalConfig,
) -> Result<MlReport> {
    let rows = kinds
        .iter()
        .map(|&k| evaluate(k, documents, labeled, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(MlReport {
        task: labeled.task.as_str().to_string(),
        config: config.clone(),
        features: TFIDF_SCHEME.to_string(),
        rows,
    })
}
