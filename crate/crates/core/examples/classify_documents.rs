// Repeated train/test evaluation of every classifier on a synthetic
// corpus whose two classes use different marker words, then the same run
// with the labels shuffled.

use idwatch::mlpipe::{
    evaluate_texts, ClassifierKind, EvalConfig, Hyperparams, MlReport, NgramConfig, TFIDF_SCHEME,
};
use idwatch::synth::{separable_corpus, shuffled_corpus};

fn run_example() -> idwatch::Result<String> {
    let config = EvalConfig {
        splits: 3,
        folds: 3,
        ngram: NgramConfig {
            n_min: 1,
            n_max: 2,
            min_df: 5,
        },
        ..EvalConfig::default()
    };
    let mut out = String::new();
    for (name, corpus) in [
        ("separable", separable_corpus(120, 11)),
        ("shuffled", shuffled_corpus(120, 11)),
    ] {
        let mut rows = Vec::new();
        for kind in ClassifierKind::ALL {
            // Smaller ensembles keep the walkthrough quick.
            let grid = match kind {
                ClassifierKind::RandomForest | ClassifierKind::GradientBoost => {
                    Some(vec![Hyperparams {
                        trees: 20,
                        rounds: 20,
                        ..Hyperparams::default()
                    }])
                }
                _ => None,
            };
            let cfg = EvalConfig {
                grid,
                ..config.clone()
            };
            rows.push(evaluate_texts(kind, &corpus.texts, &corpus.labels, &cfg)?);
        }
        let report = MlReport {
            task: name.to_string(),
            config: config.clone(),
            features: TFIDF_SCHEME.to_string(),
            rows,
        };
        out.push_str(&report.render());
        out.push('\n');
    }
    Ok(out)
}

fn main() {
    match run_example() {
        Ok(text) => print!("{text}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
