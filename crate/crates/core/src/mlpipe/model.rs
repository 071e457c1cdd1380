use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::FeatureMatrix;
use super::linear::{fit_linear, sparse_dot, Loss};
use super::tree::{grow, Tree, TreeParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Mnb,
    Logreg,
    SvmLinear,
    RandomForest,
    GradientBoost,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::Mnb,
        ClassifierKind::GradientBoost,
        ClassifierKind::RandomForest,
        ClassifierKind::SvmLinear,
        ClassifierKind::Logreg,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Mnb => "mnb",
            ClassifierKind::Logreg => "logreg",
            ClassifierKind::SvmLinear => "svm_linear",
            ClassifierKind::RandomForest => "random_forest",
            ClassifierKind::GradientBoost => "gradient_boost",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ClassifierKind::Mnb => "Multinomial Naive Bayes",
            ClassifierKind::Logreg => "Logistic Regression",
            ClassifierKind::SvmLinear => "Support Vector Machine",
            ClassifierKind::RandomForest => "Random Forest",
            ClassifierKind::GradientBoost => "Gradient Boosting",
        }
    }

    /// Candidate settings tried during validation.
    pub fn grid(self) -> Vec<Hyperparams> {
        let base = Hyperparams::default();
        match self {
            ClassifierKind::Logreg | ClassifierKind::SvmLinear => [0.1, 1.0, 10.0]
                .iter()
                .map(|&c| Hyperparams { c, ..base })
                .collect(),
            _ => vec![base],
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mnb" | "naive_bayes" => Ok(ClassifierKind::Mnb),
            "logreg" | "logistic_regression" => Ok(ClassifierKind::Logreg),
            "svm" | "svm_linear" => Ok(ClassifierKind::SvmLinear),
            "random_forest" | "rf" => Ok(ClassifierKind::RandomForest),
            "gradient_boost" | "xgboost" | "gbm" => Ok(ClassifierKind::GradientBoost),
            other => Err(Error::InvalidArgument(format!(
                "unknown classifier {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Inverse regularization strength for the linear models.
    pub c: f64,
    pub tolerance: f64,
    /// Additive smoothing for naive Bayes.
    pub smoothing: f64,
    pub trees: usize,
    pub rounds: usize,
    pub depth: usize,
    pub learning_rate: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            c: 1.0,
            tolerance: 1e-4,
            smoothing: 1.0,
            trees: 200,
            rounds: 100,
            depth: 3,
            learning_rate: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    /// Linear score `w.x + b`; also holds naive Bayes log-odds.
    Linear {
        weights: Vec<f64>,
        bias: f64,
    },
    Forest {
        trees: Vec<Tree>,
    },
    Boosted {
        init: f64,
        rate: f64,
        trees: Vec<Tree>,
    },
}

pub fn fit_classifier(
    kind: ClassifierKind,
    x: &FeatureMatrix,
    y: &[bool],
    params: &Hyperparams,
    seed: u64,
) -> Result<Model> {
    if x.n_rows() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "{} rows but {} labels",
            x.n_rows(),
            y.len()
        )));
    }
    let positives = y.iter().filter(|p| **p).count();
    if positives == 0 || positives == y.len() {
        return Err(Error::SingleClass);
    }
    Ok(match kind {
        ClassifierKind::Mnb => naive_bayes(x, y, params.smoothing),
        ClassifierKind::Logreg | ClassifierKind::SvmLinear => {
            let loss = if kind == ClassifierKind::Logreg {
                Loss::Logistic
            } else {
                Loss::SquaredHinge
            };
            let mut w = fit_linear(x, y, params.c, loss, params.tolerance);
            let bias = w.pop().unwrap_or(0.0);
            Model::Linear { weights: w, bias }
        }
        ClassifierKind::RandomForest => random_forest(x, y, params.trees, seed),
        ClassifierKind::GradientBoost => gradient_boost(x, y, params),
    })
}

pub fn predict_scores(model: &Model, x: &FeatureMatrix) -> Vec<f64> {
    x.rows.iter().map(|row| score(model, row)).collect()
}

fn score(model: &Model, row: &[(usize, f64)]) -> f64 {
    match model {
        Model::Linear { weights, bias } => sparse_dot(row, weights) + bias,
        Model::Forest { trees } => {
            trees.iter().map(|t| t.predict(row)).sum::<f64>() / trees.len() as f64
        }
        Model::Boosted { init, rate, trees } => {
            init + rate * trees.iter().map(|t| t.predict(row)).sum::<f64>()
        }
    }
}

/// Multinomial naive Bayes; the score is the log-odds of the positive class.
fn naive_bayes(x: &FeatureMatrix, y: &[bool], smoothing: f64) -> Model {
    let d = x.n_cols;
    let mut mass = [vec![smoothing; d], vec![smoothing; d]];
    for (row, &p) in x.rows.iter().zip(y) {
        for &(c, v) in row {
            mass[p as usize][c] += v;
        }
    }
    let log_probs: Vec<Vec<f64>> = mass
        .iter()
        .map(|m| {
            let total: f64 = m.iter().sum();
            m.iter().map(|v| (v / total).ln()).collect()
        })
        .collect();
    let n_pos = y.iter().filter(|p| **p).count() as f64;
    let n_neg = y.len() as f64 - n_pos;
    Model::Linear {
        weights: (0..d).map(|c| log_probs[1][c] - log_probs[0][c]).collect(),
        bias: (n_pos / n_neg).ln(),
    }
}

fn random_forest(x: &FeatureMatrix, y: &[bool], n_trees: usize, seed: u64) -> Model {
    let targets: Vec<f64> = y.iter().map(|&p| p as u8 as f64).collect();
    let n = y.len();
    let params = TreeParams {
        max_depth: None,
        max_features: Some(((x.n_cols as f64).sqrt().ceil() as usize).max(1)),
    };
    let leaf = |s: &[usize]| s.iter().map(|&i| targets[i]).sum::<f64>() / s.len() as f64;
    let trees = (0..n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let draw: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            grow(x, &targets, draw, params, &leaf, &mut rng)
        })
        .collect();
    Model::Forest { trees }
}

/// Gradient boosting on logistic loss with Newton-step leaf values.
fn gradient_boost(x: &FeatureMatrix, y: &[bool], params: &Hyperparams) -> Model {
    let labels: Vec<f64> = y.iter().map(|&p| p as u8 as f64).collect();
    let prior = labels.iter().sum::<f64>() / labels.len() as f64;
    let init = (prior / (1.0 - prior)).ln();
    let mut raw = vec![init; y.len()];
    let mut trees = Vec::with_capacity(params.rounds);
    let tree_params = TreeParams {
        max_depth: Some(params.depth),
        max_features: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..params.rounds {
        let prob: Vec<f64> = raw.iter().map(|z| 1.0 / (1.0 + (-z).exp())).collect();
        let residual: Vec<f64> = labels.iter().zip(&prob).map(|(l, p)| l - p).collect();
        let leaf = |s: &[usize]| {
            let num: f64 = s.iter().map(|&i| residual[i]).sum();
            let den: f64 = s.iter().map(|&i| prob[i] * (1.0 - prob[i])).sum();
            if den < 1e-12 {
                0.0
            } else {
                num / den
            }
        };
        let tree = grow(
            x,
            &residual,
            (0..y.len()).collect(),
            tree_params,
            &leaf,
            &mut rng,
        );
        for (i, row) in x.rows.iter().enumerate() {
            raw[i] += params.learning_rate * tree.predict(row);
        }
        trees.push(tree);
    }
    Model::Boosted {
        init,
        rate: params.learning_rate,
        trees,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlpipe::{fit_vocabulary, roc_auc, transform_tfidf, NgramConfig};

    fn separable() -> (FeatureMatrix, Vec<bool>) {
        let x = FeatureMatrix {
            n_cols: 3,
            rows: vec![
                vec![(0, 1.0)],
                vec![(0, 0.8), (2, 0.6)],
                vec![(1, 1.0)],
                vec![(1, 0.8), (2, 0.6)],
            ],
        };
        (x, vec![true, true, false, false])
    }

    #[test]
    fn every_kind_separates_clean_data() {
        let (x, y) = separable();
        let params = Hyperparams {
            trees: 25,
            rounds: 20,
            ..Hyperparams::default()
        };
        for kind in ClassifierKind::ALL {
            let model = fit_classifier(kind, &x, &y, &params, 3).unwrap();
            let scores = predict_scores(&model, &x);
            assert_eq!(roc_auc(&scores, &y).unwrap(), 1.0, "{kind}");
        }
    }

    #[test]
    fn naive_bayes_by_hand() {
        let corpus = ["flood flood", "game"];
        let cfg = NgramConfig {
            n_min: 1,
            n_max: 1,
            min_df: 1,
        };
        let vocab = fit_vocabulary(&corpus, cfg).unwrap();
        // Raw counts, as in the textbook example.
        let x = FeatureMatrix {
            n_cols: 2,
            rows: vec![
                vec![(vocab.column("flood").unwrap(), 2.0)],
                vec![(vocab.column("game").unwrap(), 1.0)],
            ],
        };
        let model = fit_classifier(
            ClassifierKind::Mnb,
            &x,
            &[true, false],
            &Hyperparams::default(),
            0,
        )
        .unwrap();
        let probe = transform_tfidf(&vocab, &["flood", "game"]);
        let s = predict_scores(&model, &probe);
        // Smoothed likelihoods: P(flood|+) = 3/4, P(flood|-) = 1/3, P(game|+) = 1/4, P(game|-) = 2/3.
        assert!((s[0] - (0.75f64 / (1.0 / 3.0)).ln()).abs() < 1e-12);
        assert!((s[1] - (0.25f64 / (2.0 / 3.0)).ln()).abs() < 1e-12);
        assert!(s[0] > s[1]);
    }

    #[test]
    fn single_class_is_rejected() {
        let (x, _) = separable();
        assert!(matches!(
            fit_classifier(
                ClassifierKind::Logreg,
                &x,
                &[true; 4],
                &Hyperparams::default(),
                0
            ),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn forest_is_seed_deterministic() {
        let (x, y) = separable();
        let p = Hyperparams {
            trees: 10,
            ..Hyperparams::default()
        };
        let a = fit_classifier(ClassifierKind::RandomForest, &x, &y, &p, 9).unwrap();
        let b = fit_classifier(ClassifierKind::RandomForest, &x, &y, &p, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ClassifierKind::ALL {
            assert_eq!(k.as_str().parse::<ClassifierKind>().unwrap(), k);
        }
    }
}
