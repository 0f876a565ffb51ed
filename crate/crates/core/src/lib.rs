//! Two-phase hybrid feature selection with a group-of-classifiers benchmark.
//!
//! Phase 1 rebalances a dataset with SMOTE and filters the synthetic samples
//! through a Naive Bayes misclassification check before merging them back.
//! Phase 2 prunes the feature space with an information-gain threshold and
//! then runs a genetic-algorithm wrapper search over the survivors. The
//! [`pipeline`] module wires both phases into method runners (all-features,
//! information-gain, GA-wrapper, SU-GA-wrapper, hybrid) evaluated with five
//! from-scratch classifiers under stratified cross-validation.

pub mod classify;
pub mod data;
pub mod error;
pub mod ga;
pub mod metrics;
pub mod pipeline;
pub mod rank;
pub mod resample;
pub mod selftest;
pub mod seed;

pub use error::{Error, Result};
