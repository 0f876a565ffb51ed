//! The five evaluated learners behind one `fit`/`predict_distribution`
//! interface, plus the cross-validation protocol that drives them.

mod bf_tree;
mod encode;
mod logistic;
mod mlp;
mod naive_bayes;
mod rule_learner;

pub use bf_tree::{BfTree, SplitRule, TraceEntry};
pub use encode::Encoder;
pub use logistic::{logistic_loss_grad, Logistic};
pub use mlp::{mlp_loss_grad, Mlp, MlpShape};
pub use naive_bayes::NaiveBayes;
pub use rule_learner::{Condition, Rule, RuleLearner};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FoldPlan, Instance};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Identifier of one of the five learners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    NaiveBayes,
    Logistic,
    Mlp,
    BfTree,
    RuleLearner,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::NaiveBayes,
        ClassifierKind::Logistic,
        ClassifierKind::Mlp,
        ClassifierKind::BfTree,
        ClassifierKind::RuleLearner,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ClassifierKind::NaiveBayes => "naive_bayes",
            ClassifierKind::Logistic => "logistic",
            ClassifierKind::Mlp => "mlp",
            ClassifierKind::BfTree => "bf_tree",
            ClassifierKind::RuleLearner => "rule_learner",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ClassifierKind::NaiveBayes => "Naive Bayes",
            ClassifierKind::Logistic => "Logistic Regression",
            ClassifierKind::Mlp => "Multilayer Perceptron",
            ClassifierKind::BfTree => "Best-First Tree",
            ClassifierKind::RuleLearner => "Rule Learner",
        }
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown classifier '{s}' (expected one of naive_bayes, logistic, mlp, bf_tree, rule_learner)"
                ))
            })
    }
}

/// A trainable model producing a probability vector over the class domain.
pub trait Classifier {
    fn kind(&self) -> ClassifierKind;
    fn fit(&mut self, d: &Dataset) -> Result<()>;
    fn predict_distribution(&self, inst: &Instance) -> Result<Vec<f64>>;
}

/// Fresh, unfitted model. `seed` matters only for the seeded learners
/// (MLP initialization, rule-learner grow/prune splits).
pub fn build_classifier(kind: ClassifierKind, seed: u64) -> Box<dyn Classifier> {
    match kind {
        ClassifierKind::NaiveBayes => Box::new(NaiveBayes::new()),
        ClassifierKind::Logistic => Box::new(Logistic::new()),
        ClassifierKind::Mlp => Box::new(Mlp::new(seed)),
        ClassifierKind::BfTree => Box::new(BfTree::new()),
        ClassifierKind::RuleLearner => Box::new(RuleLearner::new(seed)),
    }
}

/// Argmax with ties resolved toward the lowest class index.
pub fn predicted_label(dist: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in dist.iter().enumerate().skip(1) {
        if p > dist[best] {
            best = i;
        }
    }
    best
}

/// exp-normalizes raw (log-)scores into a probability vector.
pub(crate) fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return vec![1.0 / scores.len() as f64; scores.len()];
    }
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub(crate) fn check_trainable(d: &Dataset) -> Result<()> {
    if d.n_instances() == 0 {
        return Err(Error::data("cannot train on an empty dataset"));
    }
    if d.has_missing() {
        return Err(Error::data(
            "training data contains missing values; impute them first",
        ));
    }
    Ok(())
}

/// Fits one model per fold on the fold's complement and predicts its
/// held-out instances. Returns one distribution per instance, aligned with
/// the dataset's instance order. Folds train in parallel; per-fold seeds
/// are derived from the fold index, so the result is thread-count
/// independent.
pub fn cross_validate(
    kind: ClassifierKind,
    d: &Dataset,
    folds: &FoldPlan,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if folds.len() != d.n_instances() {
        return Err(Error::config(format!(
            "fold plan covers {} instances, dataset has {}",
            folds.len(),
            d.n_instances()
        )));
    }
    let observed: Vec<usize> = d
        .class_counts()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, _)| i)
        .collect();
    let per_fold: Vec<(Vec<usize>, Vec<Vec<f64>>)> = (0..folds.k)
        .into_par_iter()
        .map(|fold| {
            let (train_idx, test_idx) = folds.split(fold);
            let train = d.subset(&train_idx)?;
            let train_counts = train.class_counts();
            for &class in &observed {
                if train_counts[class] == 0 {
                    return Err(Error::data(format!(
                        "training split of fold {fold} lost class '{}'",
                        d.class_domain[class]
                    )));
                }
            }
            let mut model = build_classifier(kind, derive_seed(seed, "fold-model", fold as u64));
            model.fit(&train)?;
            let dists = test_idx
                .iter()
                .map(|&i| model.predict_distribution(&d.instances[i]))
                .collect::<Result<Vec<_>>>()?;
            Ok((test_idx, dists))
        })
        .collect::<Result<_>>()?;
    let mut out = vec![Vec::new(); d.n_instances()];
    for (test_idx, dists) in per_fold {
        for (i, dist) in test_idx.into_iter().zip(dists) {
            out[i] = dist;
        }
    }
    Ok(out)
}

/// Fits on the full dataset and predicts the training instances themselves.
pub fn resubstitute(kind: ClassifierKind, d: &Dataset, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut model = build_classifier(kind, derive_seed(seed, "resubstitution", 0));
    model.fit(d)?;
    d.instances.iter().map(|i| model.predict_distribution(i)).collect()
}
