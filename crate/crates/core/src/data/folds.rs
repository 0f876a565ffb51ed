//! Stratified fold construction for cross-validation.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::seed::rng_for;

/// Fold assignment for one dataset: `assignments[i]` is the fold of
/// instance `i`, always in `[0, k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    /// (train, test) instance indices for one fold.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, &f) in self.assignments.iter().enumerate() {
            if f == fold {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        (train, test)
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }
}

/// Builds a stratified k-fold plan: within every class, fold counts differ
/// by at most one, and the same holds for overall fold sizes. Deterministic
/// for a fixed (dataset, k, seed).
pub fn stratified_folds(d: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::config(format!("fold count must be at least 2, got {k}")));
    }
    if k > d.n_instances() {
        return Err(Error::config(format!(
            "fold count {} exceeds instance count {}",
            k,
            d.n_instances()
        )));
    }
    let counts = d.class_counts();
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::data(format!(
            "class '{}' has no instances; cannot stratify",
            d.class_domain[empty]
        )));
    }

    let mut assignments = vec![0usize; d.n_instances()];
    // Deal each class's shuffled members into consecutive fold slots; the
    // running offset keeps overall fold sizes balanced too.
    let mut next = 0usize;
    for class in 0..d.n_classes() {
        let mut members = d.members_of(class);
        let mut rng = rng_for(seed, "stratified-folds", class as u64);
        members.shuffle(&mut rng);
        for idx in members {
            assignments[idx] = next % k;
            next += 1;
        }
    }
    Ok(FoldPlan { k, assignments, seed })
}
