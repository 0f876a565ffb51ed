//! Best-first decision tree: a global frontier of expandable leaves is
//! grown in order of count-weighted Gini reduction rather than depth.

use crate::data::{AttributeKind, Cell, Dataset, Instance};
use crate::error::{Error, Result};

use super::{check_trainable, Classifier, ClassifierKind};

const MIN_REDUCTION: f64 = 1e-12;

/// Binary split test; the left branch takes matching instances.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitRule {
    ValueIs(usize),
    AtMost(f64),
}

/// One frontier expansion, recorded in the order splits were applied.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub node: usize,
    pub attribute: usize,
    pub rule: SplitRule,
    pub reduction: f64,
}

enum Node {
    Leaf {
        counts: Vec<usize>,
        n: usize,
    },
    Split {
        attribute: usize,
        rule: SplitRule,
        left: usize,
        right: usize,
        left_n: usize,
        right_n: usize,
    },
}

struct BestSplit {
    attribute: usize,
    rule: SplitRule,
    reduction: f64,
    left_rows: Vec<usize>,
    right_rows: Vec<usize>,
}

struct Candidate {
    node: usize,
    split: BestSplit,
}

#[derive(Default)]
pub struct BfTree {
    fitted: Option<Fitted>,
}

struct Fitted {
    nodes: Vec<Node>,
    n_classes: usize,
    trace: Vec<TraceEntry>,
}

impl BfTree {
    pub fn new() -> Self {
        Self::default()
    }

    /// Splits in the order they were applied; empty before fit.
    pub fn expansion_trace(&self) -> &[TraceEntry] {
        self.fitted.as_ref().map(|f| f.trace.as_slice()).unwrap_or(&[])
    }
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn class_counts(d: &Dataset, rows: &[usize]) -> Vec<usize> {
    let mut counts = vec![0; d.n_classes()];
    for &r in rows {
        counts[d.instances[r].label] += 1;
    }
    counts
}

fn cell_matches(cell: &Cell, rule: &SplitRule) -> Option<bool> {
    match (cell, rule) {
        (Cell::Nominal(v), SplitRule::ValueIs(want)) => Some(v == want),
        (Cell::Numeric(x), SplitRule::AtMost(t)) => Some(*x <= *t),
        (Cell::Missing, _) => None,
        _ => None,
    }
}

/// Best binary split of `rows` by count-weighted Gini decrease; ties keep
/// the earliest candidate in (attribute, value/threshold) order.
fn best_split(d: &Dataset, rows: &[usize]) -> Option<BestSplit> {
    if rows.len() < 2 {
        return None;
    }
    let parent_counts = class_counts(d, rows);
    let parent_cost = rows.len() as f64 * gini(&parent_counts, rows.len());
    if parent_cost <= MIN_REDUCTION {
        return None;
    }
    let mut best: Option<BestSplit> = None;
    let mut consider = |attribute: usize, rule: SplitRule| {
        let mut left_rows = Vec::new();
        let mut right_rows = Vec::new();
        for &r in rows {
            // a missing cell falls through to the right branch
            match cell_matches(&d.instances[r].values[attribute], &rule) {
                Some(true) => left_rows.push(r),
                _ => right_rows.push(r),
            }
        }
        if left_rows.is_empty() || right_rows.is_empty() {
            return;
        }
        let cost = left_rows.len() as f64 * gini(&class_counts(d, &left_rows), left_rows.len())
            + right_rows.len() as f64 * gini(&class_counts(d, &right_rows), right_rows.len());
        let reduction = parent_cost - cost;
        if reduction > MIN_REDUCTION
            && best.as_ref().is_none_or(|b| reduction > b.reduction + MIN_REDUCTION)
        {
            best = Some(BestSplit { attribute, rule, reduction, left_rows, right_rows });
        }
    };
    for (a, spec) in d.schema.iter().enumerate() {
        match &spec.kind {
            AttributeKind::Nominal(symbols) => {
                for v in 0..symbols.len() {
                    consider(a, SplitRule::ValueIs(v));
                }
            }
            AttributeKind::Numeric => {
                let mut values: Vec<f64> = rows
                    .iter()
                    .filter_map(|&r| d.instances[r].values[a].as_numeric())
                    .collect();
                values.sort_by(f64::total_cmp);
                values.dedup();
                for pair in values.windows(2) {
                    consider(a, SplitRule::AtMost((pair[0] + pair[1]) / 2.0));
                }
            }
        }
    }
    best
}

impl Classifier for BfTree {
    fn kind(&self) -> ClassifierKind {
        ClassifierKind::BfTree
    }

    fn fit(&mut self, d: &Dataset) -> Result<()> {
        check_trainable(d)?;
        let all_rows: Vec<usize> = (0..d.n_instances()).collect();
        let mut nodes = vec![Node::Leaf { counts: class_counts(d, &all_rows), n: all_rows.len() }];
        let mut frontier: Vec<Candidate> = Vec::new();
        if let Some(split) = best_split(d, &all_rows) {
            frontier.push(Candidate { node: 0, split });
        }
        let mut trace = Vec::new();
        while !frontier.is_empty() {
            // largest reduction wins; on a dead-equal tie the older node does
            let mut pick = 0;
            for (i, c) in frontier.iter().enumerate().skip(1) {
                let b = &frontier[pick];
                if c.split.reduction > b.split.reduction
                    || (c.split.reduction == b.split.reduction && c.node < b.node)
                {
                    pick = i;
                }
            }
            let Candidate { node, split } = frontier.swap_remove(pick);
            let left = nodes.len();
            let right = nodes.len() + 1;
            nodes.push(Node::Leaf {
                counts: class_counts(d, &split.left_rows),
                n: split.left_rows.len(),
            });
            nodes.push(Node::Leaf {
                counts: class_counts(d, &split.right_rows),
                n: split.right_rows.len(),
            });
            nodes[node] = Node::Split {
                attribute: split.attribute,
                rule: split.rule.clone(),
                left,
                right,
                left_n: split.left_rows.len(),
                right_n: split.right_rows.len(),
            };
            trace.push(TraceEntry {
                node,
                attribute: split.attribute,
                rule: split.rule,
                reduction: split.reduction,
            });
            if let Some(s) = best_split(d, &split.left_rows) {
                frontier.push(Candidate { node: left, split: s });
            }
            if let Some(s) = best_split(d, &split.right_rows) {
                frontier.push(Candidate { node: right, split: s });
            }
        }
        self.fitted = Some(Fitted { nodes, n_classes: d.n_classes(), trace });
        Ok(())
    }

    fn predict_distribution(&self, inst: &Instance) -> Result<Vec<f64>> {
        let fitted = self
            .fitted
            .as_ref()
            .ok_or_else(|| Error::model("bf tree queried before fit"))?;
        let mut at = 0;
        loop {
            match &fitted.nodes[at] {
                Node::Leaf { counts, n } => {
                    let denom = *n as f64 + fitted.n_classes as f64;
                    return Ok(counts.iter().map(|&c| (c as f64 + 1.0) / denom).collect());
                }
                Node::Split { attribute, rule, left, right, left_n, right_n } => {
                    at = match cell_matches(&inst.values[*attribute], rule) {
                        Some(true) => *left,
                        Some(false) => *right,
                        // missing at a split: follow the heavier branch
                        None => {
                            if left_n >= right_n {
                                *left
                            } else {
                                *right
                            }
                        }
                    };
                }
            }
        }
    }
}
