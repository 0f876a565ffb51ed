//! Dataset representation: schema, instances, ingestion, imputation, folds.

mod arff;
mod csv_load;
mod folds;
mod impute;

pub use arff::{load_arff, load_arff_with_class, write_arff};
pub use csv_load::{load_csv, ColumnKind};
pub use folds::{stratified_folds, FoldPlan};
pub use impute::impute_missing;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Attribute kind: nominal with an ordered value domain, or numeric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttributeKind {
    Nominal(Vec<String>),
    Numeric,
}

impl AttributeKind {
    pub fn is_nominal(&self) -> bool {
        matches!(self, AttributeKind::Nominal(_))
    }

    /// Size of the nominal value domain; 0 for numeric attributes.
    pub fn domain_size(&self) -> usize {
        match self {
            AttributeKind::Nominal(values) => values.len(),
            AttributeKind::Numeric => 0,
        }
    }
}

/// One attribute of the schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttributeKind,
}

impl AttributeSpec {
    pub fn nominal(name: impl Into<String>, values: Vec<String>) -> Self {
        AttributeSpec {
            name: name.into(),
            kind: AttributeKind::Nominal(values),
        }
    }

    pub fn numeric(name: impl Into<String>) -> Self {
        AttributeSpec {
            name: name.into(),
            kind: AttributeKind::Numeric,
        }
    }
}

/// One cell of an instance. Nominal cells hold an index into the attribute's
/// value domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Nominal(usize),
    Numeric(f64),
    Missing,
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    pub fn as_nominal(&self) -> Option<usize> {
        match self {
            Cell::Nominal(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_numeric(&self) -> Option<f64> {
        match self {
            Cell::Numeric(v) => Some(*v),
            _ => None,
        }
    }
}

/// Whether an instance came from the source data or from resampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    Original,
    Synthetic,
}

/// One row: attribute cells, a class label (index into the class domain),
/// and an origin flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub values: Vec<Cell>,
    pub label: usize,
    pub origin: Origin,
}

impl Instance {
    pub fn original(values: Vec<Cell>, label: usize) -> Self {
        Instance {
            values,
            label,
            origin: Origin::Original,
        }
    }

    pub fn synthetic(values: Vec<Cell>, label: usize) -> Self {
        Instance {
            values,
            label,
            origin: Origin::Synthetic,
        }
    }
}

/// Immutable table of instances with an attribute schema and class domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub relation: String,
    pub schema: Vec<AttributeSpec>,
    pub class_name: String,
    pub class_domain: Vec<String>,
    pub instances: Vec<Instance>,
}

impl Dataset {
    /// Builds a dataset, validating every structural invariant: unique
    /// attribute names, non-empty duplicate-free nominal domains, at least
    /// two class symbols, and per-instance arity and index bounds.
    pub fn new(
        relation: impl Into<String>,
        schema: Vec<AttributeSpec>,
        class_name: impl Into<String>,
        class_domain: Vec<String>,
        instances: Vec<Instance>,
    ) -> Result<Self> {
        let class_name = class_name.into();
        if class_domain.len() < 2 {
            return Err(Error::data(format!(
                "class domain must have at least 2 symbols, found {}",
                class_domain.len()
            )));
        }
        if has_duplicates(&class_domain) {
            return Err(Error::data("class domain contains duplicate symbols"));
        }
        let mut names: Vec<&str> = schema.iter().map(|a| a.name.as_str()).collect();
        names.push(class_name.as_str());
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::data("attribute names within a schema must be unique"));
        }
        for attr in &schema {
            if let AttributeKind::Nominal(values) = &attr.kind {
                if values.is_empty() {
                    return Err(Error::data(format!(
                        "nominal attribute '{}' has an empty value domain",
                        attr.name
                    )));
                }
                if has_duplicates(values) {
                    return Err(Error::data(format!(
                        "nominal attribute '{}' has duplicate domain values",
                        attr.name
                    )));
                }
            }
        }
        for (row, inst) in instances.iter().enumerate() {
            if inst.values.len() != schema.len() {
                return Err(Error::data(format!(
                    "instance {} has {} values, schema expects {}",
                    row,
                    inst.values.len(),
                    schema.len()
                )));
            }
            if inst.label >= class_domain.len() {
                return Err(Error::data(format!(
                    "instance {} label index {} out of class domain bounds",
                    row, inst.label
                )));
            }
            for (col, cell) in inst.values.iter().enumerate() {
                match (cell, &schema[col].kind) {
                    (Cell::Nominal(v), AttributeKind::Nominal(domain)) => {
                        if *v >= domain.len() {
                            return Err(Error::data(format!(
                                "instance {} attribute '{}': nominal index {} out of bounds",
                                row, schema[col].name, v
                            )));
                        }
                    }
                    (Cell::Numeric(_), AttributeKind::Numeric) | (Cell::Missing, _) => {}
                    _ => {
                        return Err(Error::data(format!(
                            "instance {} attribute '{}': cell kind does not match schema",
                            row, schema[col].name
                        )));
                    }
                }
            }
        }
        Ok(Dataset {
            relation: relation.into(),
            schema,
            class_name,
            class_domain,
            instances,
        })
    }

    pub fn n_attributes(&self) -> usize {
        self.schema.len()
    }

    pub fn n_instances(&self) -> usize {
        self.instances.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_domain.len()
    }

    /// Per-class instance counts, indexed by class domain position.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.class_domain.len()];
        for inst in &self.instances {
            counts[inst.label] += 1;
        }
        counts
    }

    /// Class labels in instance order.
    pub fn labels(&self) -> Vec<usize> {
        self.instances.iter().map(|i| i.label).collect()
    }

    pub fn has_missing(&self) -> bool {
        self.instances
            .iter()
            .any(|i| i.values.iter().any(Cell::is_missing))
    }

    pub fn count_missing(&self) -> usize {
        self.instances
            .iter()
            .map(|i| i.values.iter().filter(|c| c.is_missing()).count())
            .sum()
    }

    /// Indices of instances with the given label.
    pub fn members_of(&self, class: usize) -> Vec<usize> {
        self.instances
            .iter()
            .enumerate()
            .filter(|(_, i)| i.label == class)
            .map(|(idx, _)| idx)
            .collect()
    }

    /// Projects the dataset onto a subset of attributes, in the given order.
    /// Projection is the only feature-masking mechanism in the workspace.
    pub fn project(&self, features: &[usize]) -> Result<Dataset> {
        let mut seen = vec![false; self.schema.len()];
        for &f in features {
            if f >= self.schema.len() {
                return Err(Error::internal(format!(
                    "projection index {} out of bounds ({} attributes)",
                    f,
                    self.schema.len()
                )));
            }
            if seen[f] {
                return Err(Error::internal(format!("duplicate projection index {f}")));
            }
            seen[f] = true;
        }
        let schema = features.iter().map(|&f| self.schema[f].clone()).collect();
        let instances = self
            .instances
            .iter()
            .map(|inst| Instance {
                values: features.iter().map(|&f| inst.values[f]).collect(),
                label: inst.label,
                origin: inst.origin,
            })
            .collect();
        Ok(Dataset {
            relation: self.relation.clone(),
            schema,
            class_name: self.class_name.clone(),
            class_domain: self.class_domain.clone(),
            instances,
        })
    }

    /// New dataset keeping only the selected instance rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Result<Dataset> {
        for &r in rows {
            if r >= self.instances.len() {
                return Err(Error::internal(format!("row index {r} out of bounds")));
            }
        }
        Ok(Dataset {
            relation: self.relation.clone(),
            schema: self.schema.clone(),
            class_name: self.class_name.clone(),
            class_domain: self.class_domain.clone(),
            instances: rows.iter().map(|&r| self.instances[r].clone()).collect(),
        })
    }

    /// True when both datasets share schema, class attribute, and domains.
    pub fn schema_matches(&self, other: &Dataset) -> bool {
        self.schema == other.schema
            && self.class_name == other.class_name
            && self.class_domain == other.class_domain
    }
}

fn has_duplicates(values: &[String]) -> bool {
    let mut sorted: Vec<&str> = values.iter().map(String::as_str).collect();
    sorted.sort_unstable();
    sorted.windows(2).any(|w| w[0] == w[1])
}
