//! Document classification: tf-idf word n-gram features, five binary
//! classifiers, stratified cross-validation and repeated train/test
//! evaluation scored by ROC AUC.

mod eval;
mod features;
mod labels;
mod linear;
mod metrics;
mod model;
mod tree;

pub use eval::{
    cross_validate, cross_validate_subset, evaluate, evaluate_all, evaluate_texts,
    stratified_folds, stratified_split, EvalConfig, EvalResult, MlReport, SplitMetrics,
    TFIDF_SCHEME,
};
pub use features::{
    extract_ngrams, fit_vocabulary, transform_tfidf, CountedCorpus, FeatureMatrix, NgramConfig,
    Vocabulary,
};
pub use labels::{build_labeled_sets, LabelTask, LabeledSet, LabeledSets};
pub use metrics::roc_auc;
pub use model::{fit_classifier, predict_scores, ClassifierKind, Hyperparams, Model};
pub use tree::Tree;
