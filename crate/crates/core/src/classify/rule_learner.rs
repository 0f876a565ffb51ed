//! Sequential-covering rule induction: rules are grown on two thirds of the
//! remaining data by FOIL gain, pruned on the held-out third, and accepted
//! while their prune-set error stays under one half.

use rand::seq::SliceRandom;

use crate::data::{AttributeKind, Dataset, Instance};
use crate::error::{Error, Result};
use crate::seed::rng_for;

#[allow(unused_imports)]
use super::predicted_label;
use super::{check_trainable, Classifier, ClassifierKind};

const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    Equals { attribute: usize, value: usize },
    AtMost { attribute: usize, threshold: f64 },
    AtLeast { attribute: usize, threshold: f64 },
}

impl Condition {
    fn matches(&self, inst: &Instance) -> bool {
        match self {
            Condition::Equals { attribute, value } => {
                inst.values[*attribute].as_nominal() == Some(*value)
            }
            Condition::AtMost { attribute, threshold } => {
                matches!(inst.values[*attribute].as_numeric(), Some(x) if x <= *threshold)
            }
            Condition::AtLeast { attribute, threshold } => {
                matches!(inst.values[*attribute].as_numeric(), Some(x) if x >= *threshold)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub conditions: Vec<Condition>,
    pub class: usize,
    /// Laplace-smoothed label frequencies of the instances the rule covered
    /// when it was accepted.
    pub distribution: Vec<f64>,
    /// error of the accepted rule on its prune split, always < 0.5
    pub prune_error: f64,
}

impl Rule {
    pub fn matches(&self, inst: &Instance) -> bool {
        self.conditions.iter().all(|c| c.matches(inst))
    }
}

pub struct RuleLearner {
    seed: u64,
    fitted: Option<Fitted>,
}

struct Fitted {
    rules: Vec<Rule>,
    default_distribution: Vec<f64>,
}

impl RuleLearner {
    pub fn new(seed: u64) -> Self {
        RuleLearner { seed, fitted: None }
    }

    /// Accepted rules in match order; empty before fit.
    pub fn rules(&self) -> &[Rule] {
        self.fitted.as_ref().map(|f| f.rules.as_slice()).unwrap_or(&[])
    }
}

fn laplace(counts: &[usize]) -> Vec<f64> {
    let total: usize = counts.iter().sum();
    let denom = total as f64 + counts.len() as f64;
    counts.iter().map(|&c| (c as f64 + 1.0) / denom).collect()
}

/// Splits `pool` into roughly stratified (grow, prune) parts, two thirds
/// to grow.
fn grow_prune_split(
    d: &Dataset,
    pool: &[usize],
    seed: u64,
    round: u64,
) -> (Vec<usize>, Vec<usize>) {
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); d.n_classes()];
    for &i in pool {
        by_class[d.instances[i].label].push(i);
    }
    let mut grow = Vec::new();
    let mut prune = Vec::new();
    for (class, mut members) in by_class.into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let mut rng = rng_for(seed, "grow-prune", round * 1024 + class as u64);
        members.shuffle(&mut rng);
        let grow_n = (2 * members.len() + 1) / 3;
        grow.extend_from_slice(&members[..grow_n]);
        prune.extend_from_slice(&members[grow_n..]);
    }
    grow.sort_unstable();
    prune.sort_unstable();
    (grow, prune)
}

fn pos_neg(d: &Dataset, rows: &[usize], class: usize) -> (f64, f64) {
    let mut p = 0.0;
    let mut n = 0.0;
    for &r in rows {
        if d.instances[r].label == class {
            p += 1.0;
        } else {
            n += 1.0;
        }
    }
    (p, n)
}

/// Greedy FOIL-gain growth; returns None when no discriminating first
/// condition exists.
fn grow_rule(d: &Dataset, grow: &[usize], class: usize) -> Option<Vec<Condition>> {
    let mut conditions: Vec<Condition> = Vec::new();
    let mut covered: Vec<usize> = grow.to_vec();
    loop {
        let (p0, n0) = pos_neg(d, &covered, class);
        if p0 == 0.0 || n0 == 0.0 {
            break;
        }
        let base_rate = (p0 / (p0 + n0)).log2();
        let mut best: Option<(f64, Condition, Vec<usize>)> = None;
        let consider = |cond: Condition, best: &mut Option<(f64, Condition, Vec<usize>)>| {
            let kept: Vec<usize> =
                covered.iter().copied().filter(|&r| cond.matches(&d.instances[r])).collect();
            let (p1, n1) = pos_neg(d, &kept, class);
            if p1 == 0.0 {
                return;
            }
            let gain = p1 * ((p1 / (p1 + n1)).log2() - base_rate);
            if gain > MIN_GAIN && best.as_ref().is_none_or(|(g, _, _)| gain > g + MIN_GAIN) {
                *best = Some((gain, cond, kept));
            }
        };
        for (a, spec) in d.schema.iter().enumerate() {
            match &spec.kind {
                AttributeKind::Nominal(symbols) => {
                    let already = conditions
                        .iter()
                        .any(|c| matches!(c, Condition::Equals { attribute, .. } if *attribute == a));
                    if already {
                        continue;
                    }
                    for value in 0..symbols.len() {
                        consider(Condition::Equals { attribute: a, value }, &mut best);
                    }
                }
                AttributeKind::Numeric => {
                    let mut values: Vec<f64> = covered
                        .iter()
                        .filter_map(|&r| d.instances[r].values[a].as_numeric())
                        .collect();
                    values.sort_by(f64::total_cmp);
                    values.dedup();
                    for pair in values.windows(2) {
                        let threshold = (pair[0] + pair[1]) / 2.0;
                        consider(Condition::AtMost { attribute: a, threshold }, &mut best);
                        consider(Condition::AtLeast { attribute: a, threshold }, &mut best);
                    }
                }
            }
        }
        match best {
            Some((_, cond, kept)) => {
                conditions.push(cond);
                covered = kept;
            }
            None => break,
        }
    }
    if conditions.is_empty() {
        None
    } else {
        Some(conditions)
    }
}

/// Keeps the condition prefix maximizing (p−n)/(p+n) on the prune split,
/// preferring shorter rules on ties. Returns (conditions, p, n).
fn prune_rule(
    d: &Dataset,
    conditions: Vec<Condition>,
    prune: &[usize],
    class: usize,
) -> (Vec<Condition>, f64, f64) {
    let mut best_len = conditions.len();
    let mut best_value = f64::NEG_INFINITY;
    let mut best_pn = (0.0, 0.0);
    for len in 1..=conditions.len() {
        let prefix = &conditions[..len];
        let covered: Vec<usize> = prune
            .iter()
            .copied()
            .filter(|&r| prefix.iter().all(|c| c.matches(&d.instances[r])))
            .collect();
        let (p, n) = pos_neg(d, &covered, class);
        let value = if p + n == 0.0 { f64::NEG_INFINITY } else { (p - n) / (p + n) };
        if value > best_value {
            best_value = value;
            best_len = len;
            best_pn = (p, n);
        }
    }
    let mut conditions = conditions;
    conditions.truncate(best_len);
    (conditions, best_pn.0, best_pn.1)
}

impl Classifier for RuleLearner {
    fn kind(&self) -> ClassifierKind {
        ClassifierKind::RuleLearner
    }

    fn fit(&mut self, d: &Dataset) -> Result<()> {
        check_trainable(d)?;
        let counts = d.class_counts();
        let mut order: Vec<usize> = (0..d.n_classes()).filter(|&c| counts[c] > 0).collect();
        order.sort_by_key(|&c| (counts[c], c));

        let mut remaining: Vec<usize> = (0..d.n_instances()).collect();
        let mut rules = Vec::new();
        let mut round = 0u64;
        // every class but the most frequent gets a covering pass
        for &class in order.iter().rev().skip(1).rev() {
            loop {
                if !remaining.iter().any(|&r| d.instances[r].label == class) {
                    break;
                }
                let (grow, prune) = grow_prune_split(d, &remaining, self.seed, round);
                round += 1;
                let Some(grown) = grow_rule(d, &grow, class) else {
                    break;
                };
                let (conditions, p, n) = prune_rule(d, grown, &prune, class);
                let coverage = p + n;
                if coverage == 0.0 || n / coverage >= 0.5 {
                    break;
                }
                let rule_probe = Rule {
                    conditions,
                    class,
                    distribution: Vec::new(),
                    prune_error: n / coverage,
                };
                let covered: Vec<usize> = remaining
                    .iter()
                    .copied()
                    .filter(|&r| rule_probe.matches(&d.instances[r]))
                    .collect();
                if covered.is_empty() {
                    break;
                }
                let mut covered_counts = vec![0; d.n_classes()];
                for &r in &covered {
                    covered_counts[d.instances[r].label] += 1;
                }
                rules.push(Rule { distribution: laplace(&covered_counts), ..rule_probe });
                remaining.retain(|r| !covered.contains(r));
            }
        }

        let mut default_counts = vec![0; d.n_classes()];
        let default_pool: &[usize] =
            if remaining.is_empty() { &(0..d.n_instances()).collect::<Vec<_>>() } else { &remaining };
        for &r in default_pool {
            default_counts[d.instances[r].label] += 1;
        }
        self.fitted = Some(Fitted { rules, default_distribution: laplace(&default_counts) });
        Ok(())
    }

    fn predict_distribution(&self, inst: &Instance) -> Result<Vec<f64>> {
        let fitted = self
            .fitted
            .as_ref()
            .ok_or_else(|| Error::model("rule learner queried before fit"))?;
        for rule in &fitted.rules {
            if rule.matches(inst) {
                return Ok(rule.distribution.clone());
            }
        }
        Ok(fitted.default_distribution.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{AttributeSpec, Cell};
    use rand::Rng;

    fn class_copy_dataset() -> Dataset {
        let schema = vec![AttributeSpec::nominal(
            "x",
            vec!["a".into(), "b".into(), "c".into()],
        )];
        let mut instances = Vec::new();
        for (value, count) in [(0usize, 6usize), (1, 8), (2, 10)] {
            for _ in 0..count {
                instances.push(Instance::original(vec![Cell::Nominal(value)], value));
            }
        }
        Dataset::new(
            "t",
            schema,
            "class",
            vec!["c_a".into(), "c_b".into(), "c_c".into()],
            instances,
        )
        .unwrap()
    }

    #[test]
    fn class_copy_feature_learns_exact_rules() {
        let d = class_copy_dataset();
        let mut model = RuleLearner::new(3);
        model.fit(&d).unwrap();
        // rules for the two rarer classes, majority class left to the default
        let classes: Vec<usize> = model.rules().iter().map(|r| r.class).collect();
        assert_eq!(classes, vec![0, 1]);
        for inst in &d.instances {
            let dist = model.predict_distribution(inst).unwrap();
            assert_eq!(predicted_label(&dist), inst.label);
        }
    }

    #[test]
    fn uninformative_data_falls_back_to_majority() {
        let schema = vec![AttributeSpec::nominal("x", vec!["only".into()])];
        let mut instances = Vec::new();
        for label in [0, 0, 0, 1, 1, 1, 1, 1] {
            instances.push(Instance::original(vec![Cell::Nominal(0)], label));
        }
        let d =
            Dataset::new("t", schema, "class", vec!["min".into(), "maj".into()], instances).unwrap();
        let mut model = RuleLearner::new(11);
        model.fit(&d).unwrap();
        assert!(model.rules().is_empty());
        let dist = model
            .predict_distribution(&Instance::original(vec![Cell::Nominal(0)], 0))
            .unwrap();
        assert_eq!(predicted_label(&dist), 1);
    }

    #[test]
    fn accepted_rules_always_beat_coin_flip_on_prune_data() {
        for seed in 0..20u64 {
            let mut rng = rng_for(seed, "rule-fixture", 0);
            let mut instances = Vec::new();
            for _ in 0..30 {
                let values: Vec<Cell> =
                    (0..3).map(|_| Cell::Nominal(rng.gen_range(0..3))).collect();
                // labels partially track attribute 0 so some rules exist
                let label = if rng.gen_bool(0.7) {
                    usize::from(values[0].as_nominal().unwrap() == 2)
                } else {
                    rng.gen_range(0..2)
                };
                instances.push(Instance::original(values, label));
            }
            let schema = (0..3)
                .map(|i| {
                    AttributeSpec::nominal(
                        format!("a{i}"),
                        vec!["x".into(), "y".into(), "z".into()],
                    )
                })
                .collect();
            let d = Dataset::new(
                "t",
                schema,
                "class",
                vec!["n".into(), "p".into()],
                instances,
            )
            .unwrap();
            let mut model = RuleLearner::new(seed);
            model.fit(&d).unwrap();
            for rule in model.rules() {
                assert!(rule.prune_error < 0.5, "seed {seed}: {rule:?}");
            }
        }
    }

    #[test]
    fn deterministic_for_a_fixed_seed() {
        let d = class_copy_dataset();
        let mut a = RuleLearner::new(5);
        let mut b = RuleLearner::new(5);
        a.fit(&d).unwrap();
        b.fit(&d).unwrap();
        let q = &d.instances[0];
        assert_eq!(a.predict_distribution(q).unwrap(), b.predict_distribution(q).unwrap());
        assert_eq!(a.rules().len(), b.rules().len());
    }
}
