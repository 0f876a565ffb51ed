//! Phase 1: SMOTE oversampling of under-represented classes, a Naive Bayes
//! misclassification filter over the synthetic candidates, and the merge
//! back onto the untouched original instances.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{predicted_label, resubstitute, ClassifierKind};
use crate::data::{AttributeKind, Cell, Dataset, Instance, Origin};
use crate::error::{Error, Result};
use crate::seed::rng_for;

pub const DEFAULT_K_NEIGHBORS: usize = 5;

/// How explicit per-class oversampling percentages are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PercentConvention {
    /// percentages must be non-negative multiples of 100 (whole copies
    /// per original instance)
    IntegerReplication,
    /// any non-negative real; synthetic counts are rounded
    Fractional,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetPolicy {
    /// raise every smaller class to the majority count
    BalanceToMajority,
    /// per-class percentages of the class's own size
    Percent { per_class: Vec<f64>, convention: PercentConvention },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoteParams {
    pub k_neighbors: usize,
    pub target_policy: TargetPolicy,
    pub seed: u64,
}

impl SmoteParams {
    pub fn balance(seed: u64) -> Self {
        SmoteParams {
            k_neighbors: DEFAULT_K_NEIGHBORS,
            target_policy: TargetPolicy::BalanceToMajority,
            seed,
        }
    }

    fn validate(&self, n_classes: usize) -> Result<()> {
        if self.k_neighbors == 0 {
            return Err(Error::config("k_neighbors must be at least 1"));
        }
        if let TargetPolicy::Percent { per_class, convention } = &self.target_policy {
            if per_class.len() != n_classes {
                return Err(Error::config(format!(
                    "expected {} per-class percentages, got {}",
                    n_classes,
                    per_class.len()
                )));
            }
            for (class, &pct) in per_class.iter().enumerate() {
                if !pct.is_finite() || pct < 0.0 {
                    return Err(Error::config(format!(
                        "percentage for class {class} must be a non-negative number"
                    )));
                }
                if *convention == PercentConvention::IntegerReplication
                    && (pct / 100.0).fract().abs() > 1e-9
                {
                    return Err(Error::config(format!(
                        "percentage for class {class} must be a multiple of 100 under the integer-replication convention, got {pct}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Which instances the misclassification filter may drop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterScope {
    #[default]
    SyntheticOnly,
    All,
}

impl std::fmt::Display for FilterScope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FilterScope::SyntheticOnly => "synthetic-only",
            FilterScope::All => "all",
        })
    }
}

impl std::str::FromStr for FilterScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "synthetic-only" | "synthetic_only" => Ok(FilterScope::SyntheticOnly),
            "all" => Ok(FilterScope::All),
            other => Err(Error::config(format!(
                "unknown filter scope '{other}' (expected synthetic-only or all)"
            ))),
        }
    }
}

/// Provenance of one synthetic instance: the dataset indices of its base
/// and interpolation partner, and the interpolation weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisRecord {
    pub base: usize,
    pub neighbor: usize,
    pub u: f64,
}

/// `balance_dataset` result: the grown dataset plus bookkeeping for the
/// run log.
#[derive(Debug, Clone)]
pub struct BalanceOutcome {
    pub dataset: Dataset,
    /// synthetic instances generated per class
    pub generated: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Per-attribute (min, range) of numeric attributes, None for nominal.
fn numeric_ranges(d: &Dataset) -> Vec<Option<(f64, f64)>> {
    d.schema
        .iter()
        .enumerate()
        .map(|(a, spec)| match spec.kind {
            AttributeKind::Nominal(_) => None,
            AttributeKind::Numeric => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for inst in &d.instances {
                    if let Some(v) = inst.values[a].as_numeric() {
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
                if lo > hi {
                    Some((0.0, 0.0))
                } else {
                    Some((lo, hi - lo))
                }
            }
        })
        .collect()
}

fn distance_with(ranges: &[Option<(f64, f64)>], x: &Instance, y: &Instance) -> f64 {
    let mut total = 0.0;
    for (a, range) in ranges.iter().enumerate() {
        let contribution = match (&x.values[a], &y.values[a], range) {
            (Cell::Numeric(xv), Cell::Numeric(yv), Some((_, span))) => {
                if *span > 0.0 {
                    ((xv - yv) / span).powi(2)
                } else {
                    0.0
                }
            }
            (Cell::Nominal(xv), Cell::Nominal(yv), None) => f64::from(xv != yv),
            (Cell::Missing, Cell::Missing, _) => 0.0,
            // one side missing: maximal disagreement for this attribute
            _ => 1.0,
        };
        total += contribution;
    }
    total
}

/// Squared heterogeneous distance: normalized numeric differences plus 0/1
/// nominal mismatches. Only the ordering matters for neighbor search, so
/// the square root is never taken.
pub fn squared_distance(d: &Dataset, a: usize, b: usize) -> f64 {
    let ranges = numeric_ranges(d);
    distance_with(&ranges, &d.instances[a], &d.instances[b])
}

fn neighbors_with(
    d: &Dataset,
    ranges: &[Option<(f64, f64)>],
    index: usize,
    k: usize,
) -> Result<Vec<usize>> {
    let class = d.instances[index].label;
    let mut scored: Vec<(f64, usize)> = d
        .members_of(class)
        .into_iter()
        .filter(|&i| i != index)
        .map(|i| (distance_with(ranges, &d.instances[index], &d.instances[i]), i))
        .collect();
    if scored.is_empty() {
        return Err(Error::data(format!(
            "class '{}' has a single member; cannot search neighbors",
            d.class_domain[class]
        )));
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored.truncate(k);
    Ok(scored.into_iter().map(|(_, i)| i).collect())
}

/// The `k` nearest same-class instances (excluding the query itself), ties
/// broken by lower index; fewer than `k` candidates are all returned.
pub fn nearest_same_class_neighbors(d: &Dataset, index: usize, k: usize) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::config("neighbor count must be at least 1"));
    }
    let ranges = numeric_ranges(d);
    neighbors_with(d, &ranges, index, k)
}

fn majority_vote(d: &Dataset, neighbors: &[usize], attribute: usize, arity: usize) -> Option<usize> {
    let mut counts = vec![0usize; arity];
    for &n in neighbors {
        if let Some(v) = d.instances[n].values[attribute].as_nominal() {
            counts[v] += 1;
        }
    }
    let max = *counts.iter().max().unwrap_or(&0);
    if max == 0 {
        return None;
    }
    let mut winners = counts.iter().enumerate().filter(|(_, &c)| c == max);
    let first = winners.next().map(|(v, _)| v);
    if winners.next().is_some() {
        None // tie, caller falls back to the base instance's value
    } else {
        first
    }
}

/// Generates `n_synthetic` instances for `class` and reports how each was
/// built. Numeric cells interpolate between a random class member and one
/// of its k nearest same-class neighbors; nominal cells take the majority
/// vote of all k neighbors, ties keeping the base instance's value.
pub fn smote_class_traced(
    d: &Dataset,
    class: usize,
    n_synthetic: usize,
    params: &SmoteParams,
) -> Result<(Vec<Instance>, Vec<SynthesisRecord>)> {
    params.validate(d.n_classes())?;
    let members = d.members_of(class);
    if members.len() < 2 {
        return Err(Error::data(format!(
            "class '{}' needs at least 2 members for SMOTE, found {}",
            d.class_domain[class],
            members.len()
        )));
    }
    let ranges = numeric_ranges(d);
    let neighbor_lists: Vec<Vec<usize>> = members
        .iter()
        .map(|&m| neighbors_with(d, &ranges, m, params.k_neighbors))
        .collect::<Result<_>>()?;

    let mut rng = rng_for(params.seed, "smote", class as u64);
    let mut out = Vec::with_capacity(n_synthetic);
    let mut records = Vec::with_capacity(n_synthetic);
    for _ in 0..n_synthetic {
        let pick = rng.gen_range(0..members.len());
        let base = members[pick];
        let neighbors = &neighbor_lists[pick];
        let partner = neighbors[rng.gen_range(0..neighbors.len())];
        let u: f64 = rng.gen();
        let base_inst = &d.instances[base];
        let partner_inst = &d.instances[partner];
        let values: Vec<Cell> = d
            .schema
            .iter()
            .enumerate()
            .map(|(a, spec)| match &spec.kind {
                AttributeKind::Numeric => {
                    match (base_inst.values[a].as_numeric(), partner_inst.values[a].as_numeric()) {
                        (Some(x), Some(n)) => Cell::Numeric(x + u * (n - x)),
                        (Some(x), None) => Cell::Numeric(x),
                        (None, _) => Cell::Missing,
                    }
                }
                AttributeKind::Nominal(symbols) => {
                    match majority_vote(d, neighbors, a, symbols.len()) {
                        Some(v) => Cell::Nominal(v),
                        None => base_inst.values[a],
                    }
                }
            })
            .collect();
        out.push(Instance::synthetic(values, class));
        records.push(SynthesisRecord { base, neighbor: partner, u });
    }
    Ok((out, records))
}

/// [`smote_class_traced`] without the provenance records.
pub fn smote_class(
    d: &Dataset,
    class: usize,
    n_synthetic: usize,
    params: &SmoteParams,
) -> Result<Vec<Instance>> {
    smote_class_traced(d, class, n_synthetic, params).map(|(instances, _)| instances)
}

/// Oversamples per the target policy; original instances come first,
/// synthetics follow grouped by class. Classes too small for SMOTE are
/// skipped with a warning instead of failing the run.
pub fn balance_dataset(d: &Dataset, params: &SmoteParams) -> Result<BalanceOutcome> {
    params.validate(d.n_classes())?;
    let counts = d.class_counts();
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::data("oversampling needs at least 2 observed classes"));
    }

    let mut warnings = Vec::new();
    let mut planned = vec![0usize; d.n_classes()];
    match &params.target_policy {
        TargetPolicy::BalanceToMajority => {
            let majority = *counts.iter().max().unwrap();
            for (class, &count) in counts.iter().enumerate() {
                if count > 0 {
                    planned[class] = majority - count;
                }
            }
        }
        TargetPolicy::Percent { per_class, convention } => {
            for (class, &pct) in per_class.iter().enumerate() {
                let exact = pct / 100.0 * counts[class] as f64;
                planned[class] = match convention {
                    PercentConvention::IntegerReplication => exact.round() as usize,
                    PercentConvention::Fractional => exact.round() as usize,
                };
            }
        }
    }
    for (class, plan) in planned.iter_mut().enumerate() {
        if *plan > 0 && counts[class] < 2 {
            warnings.push(format!(
                "class '{}' has {} instance(s); SMOTE skipped",
                d.class_domain[class], counts[class]
            ));
            *plan = 0;
        }
    }

    let batches: Vec<Vec<Instance>> = planned
        .par_iter()
        .enumerate()
        .map(|(class, &n)| {
            if n == 0 {
                Ok(Vec::new())
            } else {
                smote_class(d, class, n, params)
            }
        })
        .collect::<Result<_>>()?;

    let mut instances = d.instances.clone();
    let generated: Vec<usize> = batches.iter().map(Vec::len).collect();
    for batch in batches {
        instances.extend(batch);
    }
    let dataset = Dataset::new(
        d.relation.clone(),
        d.schema.clone(),
        d.class_name.clone(),
        d.class_domain.clone(),
        instances,
    )?;
    Ok(BalanceOutcome { dataset, generated, warnings })
}

/// Drops every in-scope instance that a Naive Bayes model fit on the whole
/// dataset misclassifies. Returns the filtered dataset and the number of
/// removals.
pub fn misclassification_filter(d: &Dataset, scope: FilterScope) -> Result<(Dataset, usize)> {
    if d.n_instances() == 0 {
        return Err(Error::data("cannot filter an empty dataset"));
    }
    let predictions = resubstitute(ClassifierKind::NaiveBayes, d, 0)?;
    let kept: Vec<Instance> = d
        .instances
        .iter()
        .zip(&predictions)
        .filter(|(inst, dist)| {
            let in_scope = scope == FilterScope::All || inst.origin == Origin::Synthetic;
            !in_scope || predicted_label(dist) == inst.label
        })
        .map(|(inst, _)| inst.clone())
        .collect();
    let removed = d.n_instances() - kept.len();
    let filtered = Dataset::new(
        d.relation.clone(),
        d.schema.clone(),
        d.class_name.clone(),
        d.class_domain.clone(),
        kept,
    )?;
    let before = d.class_counts();
    let after = filtered.class_counts();
    for class in 0..d.n_classes() {
        if before[class] > 0 && after[class] == 0 {
            return Err(Error::data(format!(
                "misclassification filter removed every instance of class '{}'",
                d.class_domain[class]
            )));
        }
    }
    Ok((filtered, removed))
}

/// Every instance of `original` verbatim, followed by the synthetic
/// survivors from `filtered`.
pub fn merge_with_original(original: &Dataset, filtered: &Dataset) -> Result<Dataset> {
    if !original.schema_matches(filtered) {
        return Err(Error::data(
            "cannot merge: filtered dataset's schema differs from the original",
        ));
    }
    let mut instances = original.instances.clone();
    instances.extend(
        filtered
            .instances
            .iter()
            .filter(|i| i.origin == Origin::Synthetic)
            .cloned(),
    );
    Dataset::new(
        original.relation.clone(),
        original.schema.clone(),
        original.class_name.clone(),
        original.class_domain.clone(),
        instances,
    )
}
