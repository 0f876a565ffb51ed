//! Missing-value imputation: per-class mode for nominal cells, per-class
//! mean for numeric cells, with a global fallback when a class has no
//! observed value for an attribute.

use super::{AttributeKind, Cell, Dataset};
use crate::error::{Error, Result};

pub fn impute_missing(d: &Dataset) -> Result<Dataset> {
    if !d.has_missing() {
        return Ok(d.clone());
    }

    let n_classes = d.n_classes();
    let mut out = d.clone();

    for (col, attr) in d.schema.iter().enumerate() {
        match &attr.kind {
            AttributeKind::Nominal(domain) => {
                // per-class value counts plus a global row
                let mut counts = vec![vec![0usize; domain.len()]; n_classes + 1];
                for inst in &d.instances {
                    if let Cell::Nominal(v) = inst.values[col] {
                        counts[inst.label][v] += 1;
                        counts[n_classes][v] += 1;
                    }
                }
                let global_mode = mode(&counts[n_classes]).ok_or_else(|| {
                    Error::data(format!(
                        "attribute '{}' has no observed values to impute from",
                        attr.name
                    ))
                })?;
                for inst in &mut out.instances {
                    if inst.values[col].is_missing() {
                        let fill = mode(&counts[inst.label]).unwrap_or(global_mode);
                        inst.values[col] = Cell::Nominal(fill);
                    }
                }
            }
            AttributeKind::Numeric => {
                let mut sums = vec![(0.0f64, 0usize); n_classes + 1];
                for inst in &d.instances {
                    if let Cell::Numeric(v) = inst.values[col] {
                        sums[inst.label].0 += v;
                        sums[inst.label].1 += 1;
                        sums[n_classes].0 += v;
                        sums[n_classes].1 += 1;
                    }
                }
                if sums[n_classes].1 == 0 {
                    return Err(Error::data(format!(
                        "attribute '{}' has no observed values to impute from",
                        attr.name
                    )));
                }
                let global_mean = sums[n_classes].0 / sums[n_classes].1 as f64;
                for inst in &mut out.instances {
                    if inst.values[col].is_missing() {
                        let (sum, n) = sums[inst.label];
                        let fill = if n > 0 { sum / n as f64 } else { global_mean };
                        inst.values[col] = Cell::Numeric(fill);
                    }
                }
            }
        }
    }

    debug_assert!(!out.has_missing());
    Ok(out)
}

/// Index of the largest count; ties go to the lowest value-domain index.
fn mode(counts: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    for (i, &c) in counts.iter().enumerate() {
        if c > 0 && best.is_none_or(|(_, bc)| c > bc) {
            best = Some((i, c));
        }
    }
    best.map(|(i, _)| i)
}
