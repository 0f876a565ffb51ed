//! One-hot layout shared by the numeric models (logistic, MLP).

use crate::data::{AttributeKind, AttributeSpec, Cell, Instance};

/// Maps a mixed nominal/numeric schema onto a flat feature vector: each
/// nominal attribute expands to one indicator per symbol, numeric
/// attributes pass through as single columns.
#[derive(Debug, Clone)]
pub struct Encoder {
    offsets: Vec<usize>,
    kinds: Vec<AttributeKind>,
    width: usize,
}

impl Encoder {
    pub fn from_schema(schema: &[AttributeSpec]) -> Self {
        let mut offsets = Vec::with_capacity(schema.len());
        let mut kinds = Vec::with_capacity(schema.len());
        let mut width = 0;
        for spec in schema {
            offsets.push(width);
            width += match &spec.kind {
                AttributeKind::Nominal(symbols) => symbols.len(),
                AttributeKind::Numeric => 1,
            };
            kinds.push(spec.kind.clone());
        }
        Encoder { offsets, kinds, width }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Encodes one instance. A missing cell leaves its block at zero, which
    /// drops the attribute's contribution without poisoning the row.
    pub fn encode(&self, inst: &Instance) -> Vec<f64> {
        let mut row = vec![0.0; self.width];
        for (a, cell) in inst.values.iter().enumerate() {
            let base = self.offsets[a];
            match (cell, &self.kinds[a]) {
                (Cell::Nominal(v), AttributeKind::Nominal(_)) => row[base + v] = 1.0,
                (Cell::Numeric(x), AttributeKind::Numeric) => row[base] = *x,
                (Cell::Missing, _) => {}
                _ => unreachable!("cell kind validated against schema"),
            }
        }
        row
    }
}
