//! Naive Bayes with Laplace-smoothed nominal likelihoods and per-class
//! Gaussian numeric likelihoods.

use crate::data::{AttributeKind, Cell, Dataset, Instance};
use crate::error::{Error, Result};

use super::{check_trainable, softmax, Classifier, ClassifierKind};

const VARIANCE_FLOOR: f64 = 1e-6;

enum Likelihood {
    /// log P(value | class), add-1 smoothed: [class][value]
    Nominal(Vec<Vec<f64>>),
    /// per-class (mean, variance), variance floored
    Gaussian(Vec<(f64, f64)>),
}

#[derive(Default)]
pub struct NaiveBayes {
    fitted: Option<Fitted>,
}

struct Fitted {
    log_priors: Vec<f64>,
    likelihoods: Vec<Likelihood>,
}

impl NaiveBayes {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Classifier for NaiveBayes {
    fn kind(&self) -> ClassifierKind {
        ClassifierKind::NaiveBayes
    }

    fn fit(&mut self, d: &Dataset) -> Result<()> {
        check_trainable(d)?;
        let n_classes = d.n_classes();
        let counts = d.class_counts();
        let total = d.n_instances() as f64;
        // Priors are plain frequencies; a class absent from training keeps
        // probability zero rather than a smoothed sliver.
        let log_priors: Vec<f64> = counts
            .iter()
            .map(|&c| if c == 0 { f64::NEG_INFINITY } else { (c as f64 / total).ln() })
            .collect();

        let mut likelihoods = Vec::with_capacity(d.n_attributes());
        for (a, spec) in d.schema.iter().enumerate() {
            let lk = match &spec.kind {
                AttributeKind::Nominal(symbols) => {
                    let arity = symbols.len();
                    let mut table = vec![vec![0.0f64; arity]; n_classes];
                    for inst in &d.instances {
                        if let Cell::Nominal(v) = inst.values[a] {
                            table[inst.label][v] += 1.0;
                        }
                    }
                    for row in table.iter_mut() {
                        let class_total: f64 = row.iter().sum();
                        for cell in row.iter_mut() {
                            *cell = ((*cell + 1.0) / (class_total + arity as f64)).ln();
                        }
                    }
                    Likelihood::Nominal(table)
                }
                AttributeKind::Numeric => {
                    let mut stats = Vec::with_capacity(n_classes);
                    for class in 0..n_classes {
                        let vals: Vec<f64> = d
                            .instances
                            .iter()
                            .filter(|i| i.label == class)
                            .filter_map(|i| i.values[a].as_numeric())
                            .collect();
                        if vals.is_empty() {
                            stats.push((0.0, 1.0));
                            continue;
                        }
                        let n = vals.len() as f64;
                        let mean = vals.iter().sum::<f64>() / n;
                        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                        stats.push((mean, var.max(VARIANCE_FLOOR)));
                    }
                    Likelihood::Gaussian(stats)
                }
            };
            likelihoods.push(lk);
        }
        self.fitted = Some(Fitted { log_priors, likelihoods });
        Ok(())
    }

    fn predict_distribution(&self, inst: &Instance) -> Result<Vec<f64>> {
        let fitted = self
            .fitted
            .as_ref()
            .ok_or_else(|| Error::model("naive bayes queried before fit"))?;
        if inst.values.len() != fitted.likelihoods.len() {
            return Err(Error::model(format!(
                "instance has {} attributes, model expects {}",
                inst.values.len(),
                fitted.likelihoods.len()
            )));
        }
        let mut scores = fitted.log_priors.clone();
        for (a, lk) in fitted.likelihoods.iter().enumerate() {
            match (&inst.values[a], lk) {
                (Cell::Nominal(v), Likelihood::Nominal(table)) => {
                    for (class, score) in scores.iter_mut().enumerate() {
                        *score += table[class][*v];
                    }
                }
                (Cell::Numeric(x), Likelihood::Gaussian(stats)) => {
                    for (class, score) in scores.iter_mut().enumerate() {
                        let (mean, var) = stats[class];
                        *score += -0.5 * ((2.0 * std::f64::consts::PI * var).ln()
                            + (x - mean).powi(2) / var);
                    }
                }
                // Missing attribute: marginalize by skipping its factor.
                (Cell::Missing, _) => {}
                _ => {
                    return Err(Error::model(format!(
                        "attribute {a} kind does not match the fitted schema"
                    )))
                }
            }
        }
        Ok(softmax(&scores))
    }
}
