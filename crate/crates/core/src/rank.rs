//! Entropy-based feature scoring: information gain for the pre-filter and
//! the plain filter baseline, symmetrical uncertainty for the SU baseline,
//! plus equal-width discretization as the numeric fallback.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{AttributeKind, AttributeSpec, Cell, Dataset, Instance};
use crate::error::{Error, Result};

/// Bin count used when ranking has to discretize a numeric attribute itself.
pub const DEFAULT_BINS: usize = 10;

/// Logarithm base for entropy. Any fixed base rescales scores without
/// changing their order, which the test suite asserts directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogBase {
    Two,
    Natural,
}

impl LogBase {
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::Natural => x.ln(),
        }
    }
}

/// Which score a ranking is sorted by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    InfoGain,
    SymmetricalUncertainty,
}

impl std::fmt::Display for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Measure::InfoGain => "info-gain",
            Measure::SymmetricalUncertainty => "symmetrical-uncertainty",
        })
    }
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ig" | "info-gain" | "info_gain" => Ok(Measure::InfoGain),
            "su" | "symmetrical-uncertainty" | "symmetrical_uncertainty" => {
                Ok(Measure::SymmetricalUncertainty)
            }
            other => Err(Error::config(format!(
                "unknown measure '{other}' (expected ig or su)"
            ))),
        }
    }
}

/// One attribute's score together with its position in the descending sort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub attribute: usize,
    pub score: f64,
    pub rank: usize,
}

/// Shannon entropy (bits) of a symbol sequence, with 0·log 0 taken as 0.
pub fn entropy<T: PartialEq>(labels: &[T]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::data("entropy of an empty sequence is undefined"));
    }
    // First-appearance indexing keeps the summation order independent of
    // hasher state, so repeated runs produce bit-identical sums.
    let mut symbols: Vec<&T> = Vec::new();
    let mut counts: Vec<f64> = Vec::new();
    for label in labels {
        match symbols.iter().position(|s| *s == label) {
            Some(i) => counts[i] += 1.0,
            None => {
                symbols.push(label);
                counts.push(1.0);
            }
        }
    }
    Ok(entropy_of(&counts, labels.len() as f64, LogBase::Two))
}

fn entropy_of(counts: &[f64], total: f64, base: LogBase) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    let mut h = 0.0;
    for &c in counts {
        if c > 0.0 {
            let p = c / total;
            h -= p * base.log(p);
        }
    }
    h
}

struct Contingency {
    /// counts[value][class], over instances where the attribute is observed
    counts: Vec<Vec<f64>>,
    value_totals: Vec<f64>,
    class_totals: Vec<f64>,
    total: f64,
}

fn contingency(d: &Dataset, attribute: usize) -> Result<Contingency> {
    let spec = d
        .schema
        .get(attribute)
        .ok_or_else(|| Error::internal(format!("attribute index {attribute} out of range")))?;
    let arity = match &spec.kind {
        AttributeKind::Nominal(symbols) => symbols.len(),
        AttributeKind::Numeric => {
            return Err(Error::data(format!(
                "attribute '{}' is numeric; discretize it before entropy scoring",
                spec.name
            )))
        }
    };
    let mut counts = vec![vec![0.0; d.n_classes()]; arity];
    let mut value_totals = vec![0.0; arity];
    let mut class_totals = vec![0.0; d.n_classes()];
    let mut total = 0.0;
    for inst in &d.instances {
        if let Cell::Nominal(v) = inst.values[attribute] {
            counts[v][inst.label] += 1.0;
            value_totals[v] += 1.0;
            class_totals[inst.label] += 1.0;
            total += 1.0;
        }
    }
    Ok(Contingency { counts, value_totals, class_totals, total })
}

/// (IG, H(X), H(Y)) restricted to instances where the attribute is observed.
fn gain_parts(d: &Dataset, attribute: usize, base: LogBase) -> Result<(f64, f64, f64)> {
    let t = contingency(d, attribute)?;
    if t.total == 0.0 {
        return Ok((0.0, 0.0, 0.0));
    }
    let hy = entropy_of(&t.class_totals, t.total, base);
    let hx = entropy_of(&t.value_totals, t.total, base);
    let mut conditional = 0.0;
    for (v, row) in t.counts.iter().enumerate() {
        let nv = t.value_totals[v];
        if nv > 0.0 {
            conditional += nv / t.total * entropy_of(row, nv, base);
        }
    }
    // Rounding can push the difference a hair below zero; the score is
    // non-negative by definition.
    Ok(((hy - conditional).max(0.0), hx, hy))
}

/// Information gain of the class given one nominal attribute, in bits.
pub fn info_gain(d: &Dataset, attribute: usize) -> Result<f64> {
    gain_parts(d, attribute, LogBase::Two).map(|(ig, _, _)| ig)
}

fn su_from(ig: f64, hx: f64, hy: f64) -> f64 {
    let denom = hx + hy;
    if denom == 0.0 {
        0.0
    } else {
        (2.0 * ig / denom).min(1.0)
    }
}

/// Symmetrical uncertainty 2·IG/(H(X)+H(Y)), 0 when both entropies vanish.
pub fn symmetrical_uncertainty(d: &Dataset, attribute: usize) -> Result<f64> {
    gain_parts(d, attribute, LogBase::Two).map(|(ig, hx, hy)| su_from(ig, hx, hy))
}

/// Rewrites one numeric attribute as a nominal attribute with `bins`
/// equal-width interval symbols over the observed [min, max]. A constant
/// attribute collapses to a single bin. Missing cells stay missing.
pub fn discretize(d: &Dataset, attribute: usize, bins: usize) -> Result<Dataset> {
    let spec = d
        .schema
        .get(attribute)
        .ok_or_else(|| Error::internal(format!("attribute index {attribute} out of range")))?;
    if spec.kind.is_nominal() {
        return Err(Error::data(format!(
            "attribute '{}' is already nominal",
            spec.name
        )));
    }
    if bins < 2 {
        return Err(Error::config(format!("bin count must be at least 2, got {bins}")));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for inst in &d.instances {
        if let Some(v) = inst.values[attribute].as_numeric() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if lo > hi {
        return Err(Error::data(format!(
            "attribute '{}' has no observed values to discretize",
            spec.name
        )));
    }
    let n_bins = if hi > lo { bins } else { 1 };
    let symbols: Vec<String> = (0..n_bins).map(|i| format!("bin{i}")).collect();

    let mut schema = d.schema.clone();
    schema[attribute] = AttributeSpec::nominal(spec.name.clone(), symbols);
    let instances = d
        .instances
        .iter()
        .map(|inst| {
            let mut values = inst.values.clone();
            values[attribute] = match values[attribute] {
                Cell::Numeric(v) => {
                    let idx = if n_bins == 1 {
                        0
                    } else {
                        (((v - lo) / (hi - lo)) * n_bins as f64) as usize
                    };
                    Cell::Nominal(idx.min(n_bins - 1))
                }
                Cell::Missing => Cell::Missing,
                Cell::Nominal(_) => unreachable!("numeric column holds no nominal cells"),
            };
            Instance { values, label: inst.label, origin: inst.origin }
        })
        .collect();
    Dataset::new(
        d.relation.clone(),
        schema,
        d.class_name.clone(),
        d.class_domain.clone(),
        instances,
    )
}

/// Discretizes every numeric attribute with `bins` equal-width bins;
/// identity on all-nominal datasets.
pub fn discretize_all(d: &Dataset, bins: usize) -> Result<Dataset> {
    let mut out = None;
    for (a, spec) in d.schema.iter().enumerate() {
        if !spec.kind.is_nominal() {
            let base = out.take().unwrap_or_else(|| d.clone());
            out = Some(discretize(&base, a, bins)?);
        }
    }
    Ok(out.unwrap_or_else(|| d.clone()))
}

/// All attribute scores sorted descending, ties broken by ascending
/// attribute index. Numeric attributes are first discretized with
/// [`DEFAULT_BINS`] equal-width bins.
pub fn rank_features(d: &Dataset) -> Result<Vec<FeatureScore>> {
    rank_features_by(d, Measure::InfoGain)
}

/// [`rank_features`] under a chosen score.
pub fn rank_features_by(d: &Dataset, measure: Measure) -> Result<Vec<FeatureScore>> {
    rank_features_with(d, measure, LogBase::Two)
}

/// Full-control ranking entry point; the log base exists so tests can
/// assert that base choice never reorders features.
pub fn rank_features_with(d: &Dataset, measure: Measure, base: LogBase) -> Result<Vec<FeatureScore>> {
    let owned;
    let d = if d.schema.iter().all(|s| s.kind.is_nominal()) {
        d
    } else {
        owned = discretize_all(d, DEFAULT_BINS)?;
        &owned
    };
    let scores: Vec<f64> = (0..d.n_attributes())
        .into_par_iter()
        .map(|a| {
            gain_parts(d, a, base).map(|(ig, hx, hy)| match measure {
                Measure::InfoGain => ig,
                Measure::SymmetricalUncertainty => su_from(ig, hx, hy),
            })
        })
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(rank, attribute)| FeatureScore { attribute, score: scores[attribute], rank })
        .collect())
}

/// Attribute indices scoring strictly above `threshold`, in rank order.
pub fn select_above_threshold(scores: &[FeatureScore], threshold: f64) -> Result<Vec<usize>> {
    let picked: Vec<usize> = scores
        .iter()
        .filter(|s| s.score > threshold)
        .map(|s| s.attribute)
        .collect();
    if picked.is_empty() {
        return Err(Error::config(format!(
            "no feature scores above threshold {threshold}; lower the threshold or switch to a top-k cut"
        )));
    }
    Ok(picked)
}

/// The `k` best-ranked attribute indices (all of them when k exceeds the
/// attribute count), in rank order.
pub fn select_top_k(scores: &[FeatureScore], k: usize) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::config("top-k selection needs k of at least 1"));
    }
    Ok(scores.iter().take(k).map(|s| s.attribute).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b} (tol {tol})");
    }

    /// Dataset from explicit nominal rows: `rows[i] = (attribute values, label)`.
    fn nominal_dataset(arities: &[usize], n_classes: usize, rows: &[(&[usize], usize)]) -> Dataset {
        let schema = arities
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                AttributeSpec::nominal(format!("a{i}"), (0..a).map(|v| format!("v{v}")).collect())
            })
            .collect();
        let domain = (0..n_classes).map(|c| format!("c{c}")).collect();
        let instances = rows
            .iter()
            .map(|(vals, label)| {
                Instance::original(vals.iter().map(|&v| Cell::Nominal(v)).collect(), *label)
            })
            .collect();
        Dataset::new("t", schema, "class", domain, instances).unwrap()
    }

    #[test]
    fn entropy_matches_hand_values() {
        assert_close(entropy(&['a', 'a', 'b', 'b']).unwrap(), 1.0, 1e-12);
        assert_close(entropy(&['a', 'a', 'a', 'a']).unwrap(), 0.0, 1e-12);
        assert_close(entropy(&['a', 'a', 'a', 'b']).unwrap(), 0.811278, 1e-6);
        assert!(entropy::<char>(&[]).is_err());
    }

    #[test]
    fn info_gain_of_class_copy_is_class_entropy() {
        let rows: Vec<(&[usize], usize)> = vec![
            (&[0], 0),
            (&[0], 0),
            (&[1], 1),
            (&[1], 1),
        ];
        let d = nominal_dataset(&[2], 2, &rows);
        assert_close(info_gain(&d, 0).unwrap(), 1.0, 1e-12);
        assert_close(symmetrical_uncertainty(&d, 0).unwrap(), 1.0, 1e-12);
    }

    #[test]
    fn constant_attribute_scores_zero() {
        let rows: Vec<(&[usize], usize)> = vec![(&[0], 0), (&[0], 1), (&[0], 0), (&[0], 1)];
        let d = nominal_dataset(&[1], 2, &rows);
        assert_close(info_gain(&d, 0).unwrap(), 0.0, 1e-12);
        assert_close(symmetrical_uncertainty(&d, 0).unwrap(), 0.0, 1e-12);
    }

    #[test]
    fn skewed_contingency_matches_hand_computation() {
        // {x0: 3 of y0 + 1 of y1, x1: 1 of y0 + 3 of y1} → 1 − H(1/4) bits
        let rows: Vec<(&[usize], usize)> = vec![
            (&[0], 0),
            (&[0], 0),
            (&[0], 0),
            (&[0], 1),
            (&[1], 0),
            (&[1], 1),
            (&[1], 1),
            (&[1], 1),
        ];
        let d = nominal_dataset(&[2], 2, &rows);
        assert_close(info_gain(&d, 0).unwrap(), 0.188722, 1e-6);
        assert_close(symmetrical_uncertainty(&d, 0).unwrap(), 0.188722, 1e-6);
    }

    #[test]
    fn rank_sorts_descending_with_index_ties() {
        // a0: class copy (IG 1), a1: constant (IG 0), a2: constant (IG 0)
        let rows: Vec<(&[usize], usize)> = vec![
            (&[0, 0, 0], 0),
            (&[0, 0, 0], 0),
            (&[1, 0, 0], 1),
            (&[1, 0, 0], 1),
        ];
        let d = nominal_dataset(&[2, 1, 1], 2, &rows);
        let ranked = rank_features(&d).unwrap();
        let order: Vec<usize> = ranked.iter().map(|s| s.attribute).collect();
        assert_eq!(order, vec![0, 1, 2]);
        let ranks: Vec<usize> = ranked.iter().map(|s| s.rank).collect();
        assert_eq!(ranks, vec![0, 1, 2]);
    }

    #[test]
    fn base_choice_never_reorders() {
        let rows: Vec<(&[usize], usize)> = vec![
            (&[0, 1, 0], 0),
            (&[0, 0, 1], 0),
            (&[1, 1, 0], 1),
            (&[1, 0, 1], 0),
            (&[0, 1, 1], 1),
            (&[1, 0, 0], 1),
        ];
        let d = nominal_dataset(&[2, 2, 2], 2, &rows);
        let two = rank_features_with(&d, Measure::InfoGain, LogBase::Two).unwrap();
        let nat = rank_features_with(&d, Measure::InfoGain, LogBase::Natural).unwrap();
        let a: Vec<usize> = two.iter().map(|s| s.attribute).collect();
        let b: Vec<usize> = nat.iter().map(|s| s.attribute).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn threshold_and_top_k_selection() {
        let scores = vec![
            FeatureScore { attribute: 2, score: 0.5, rank: 0 },
            FeatureScore { attribute: 0, score: 0.3, rank: 1 },
            FeatureScore { attribute: 1, score: 0.0, rank: 2 },
        ];
        assert_eq!(select_above_threshold(&scores, 0.0).unwrap(), vec![2, 0]);
        assert!(select_above_threshold(&scores, 1.0).is_err());
        assert_eq!(select_top_k(&scores, 2).unwrap(), vec![2, 0]);
        assert_eq!(select_top_k(&scores, 9).unwrap(), vec![2, 0, 1]);
        assert!(select_top_k(&scores, 0).is_err());
    }

    #[test]
    fn discretize_equal_width() {
        let d = Dataset::new(
            "t",
            vec![AttributeSpec::numeric("x")],
            "class",
            vec!["a".into(), "b".into()],
            vec![
                Instance::original(vec![Cell::Numeric(0.0)], 0),
                Instance::original(vec![Cell::Numeric(5.0)], 1),
                Instance::original(vec![Cell::Numeric(10.0)], 0),
            ],
        )
        .unwrap();
        let binned = discretize(&d, 0, 2).unwrap();
        let vals: Vec<usize> = binned
            .instances
            .iter()
            .map(|i| i.values[0].as_nominal().unwrap())
            .collect();
        assert_eq!(vals, vec![0, 1, 1]);
        assert!(discretize(&binned, 0, 2).is_err(), "already nominal");
        assert!(discretize(&d, 0, 1).is_err(), "bins below 2");
    }

    #[test]
    fn discretize_constant_collapses_to_one_bin() {
        let d = Dataset::new(
            "t",
            vec![AttributeSpec::numeric("x")],
            "class",
            vec!["a".into(), "b".into()],
            vec![
                Instance::original(vec![Cell::Numeric(3.0)], 0),
                Instance::original(vec![Cell::Numeric(3.0)], 1),
            ],
        )
        .unwrap();
        let binned = discretize(&d, 0, 4).unwrap();
        assert_eq!(binned.schema[0].kind.domain_size(), 1);
    }

    #[test]
    fn discretize_spans_all_bins_on_uniform_grid() {
        let d = Dataset::new(
            "t",
            vec![AttributeSpec::numeric("x")],
            "class",
            vec!["a".into(), "b".into()],
            vec![
                Instance::original(vec![Cell::Numeric(1.0)], 0),
                Instance::original(vec![Cell::Numeric(2.0)], 1),
                Instance::original(vec![Cell::Numeric(3.0)], 0),
                Instance::original(vec![Cell::Numeric(4.0)], 1),
            ],
        )
        .unwrap();
        let binned = discretize(&d, 0, 4).unwrap();
        let mut vals: Vec<usize> = binned
            .instances
            .iter()
            .map(|i| i.values[0].as_nominal().unwrap())
            .collect();
        vals.sort_unstable();
        assert_eq!(vals, vec![0, 1, 2, 3]);
    }

    #[test]
    fn missing_cells_are_left_out_of_the_table() {
        let d = Dataset::new(
            "t",
            vec![AttributeSpec::nominal("x", vec!["v0".into(), "v1".into()])],
            "class",
            vec!["a".into(), "b".into()],
            vec![
                Instance::original(vec![Cell::Nominal(0)], 0),
                Instance::original(vec![Cell::Nominal(1)], 1),
                Instance::original(vec![Cell::Missing], 0),
            ],
        )
        .unwrap();
        assert_close(info_gain(&d, 0).unwrap(), 1.0, 1e-12);
    }
}
