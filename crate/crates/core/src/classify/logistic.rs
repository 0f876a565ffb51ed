//! Multinomial logistic regression trained by full-batch gradient descent.

use crate::data::{Dataset, Instance};
use crate::error::{Error, Result};

use super::encode::Encoder;
use super::{check_trainable, softmax, Classifier, ClassifierKind};

const LEARNING_RATE: f64 = 0.1;
const MAX_EPOCHS: usize = 2000;
const GRAD_TOLERANCE: f64 = 1e-6;
const RIDGE: f64 = 1e-8;

/// Mean cross-entropy with an L2 penalty (biases excluded) and its analytic
/// gradient. `weights` is row-major per class, each row `width + 1` long
/// with the bias last. Public so tests can difference it numerically.
pub fn logistic_loss_grad(
    weights: &[f64],
    rows: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    ridge: f64,
) -> (f64, Vec<f64>) {
    let width = rows[0].len();
    let stride = width + 1;
    debug_assert_eq!(weights.len(), n_classes * stride);
    let n = rows.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; weights.len()];
    let mut scores = vec![0.0; n_classes];
    for (row, &label) in rows.iter().zip(labels) {
        for (c, score) in scores.iter_mut().enumerate() {
            let w = &weights[c * stride..(c + 1) * stride];
            *score = w[width] + row.iter().zip(w).map(|(x, wj)| x * wj).sum::<f64>();
        }
        let probs = softmax(&scores);
        loss -= probs[label].max(f64::MIN_POSITIVE).ln();
        for (c, &p) in probs.iter().enumerate() {
            let delta = p - if c == label { 1.0 } else { 0.0 };
            let g = &mut grad[c * stride..(c + 1) * stride];
            for (j, x) in row.iter().enumerate() {
                g[j] += delta * x;
            }
            g[width] += delta;
        }
    }
    loss /= n;
    for g in grad.iter_mut() {
        *g /= n;
    }
    for c in 0..n_classes {
        for j in 0..width {
            let w = weights[c * stride + j];
            loss += 0.5 * ridge * w * w;
            grad[c * stride + j] += ridge * w;
        }
    }
    (loss, grad)
}

#[derive(Default)]
pub struct Logistic {
    fitted: Option<Fitted>,
}

struct Fitted {
    encoder: Encoder,
    weights: Vec<f64>,
    n_classes: usize,
}

impl Logistic {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Classifier for Logistic {
    fn kind(&self) -> ClassifierKind {
        ClassifierKind::Logistic
    }

    fn fit(&mut self, d: &Dataset) -> Result<()> {
        check_trainable(d)?;
        let encoder = Encoder::from_schema(&d.schema);
        let rows: Vec<Vec<f64>> = d.instances.iter().map(|i| encoder.encode(i)).collect();
        let labels = d.labels();
        let n_classes = d.n_classes();
        let stride = encoder.width() + 1;
        let mut weights = vec![0.0; n_classes * stride];
        for _ in 0..MAX_EPOCHS {
            let (_, grad) = logistic_loss_grad(&weights, &rows, &labels, n_classes, RIDGE);
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm < GRAD_TOLERANCE {
                break;
            }
            for (w, g) in weights.iter_mut().zip(&grad) {
                *w -= LEARNING_RATE * g;
            }
        }
        self.fitted = Some(Fitted { encoder, weights, n_classes });
        Ok(())
    }

    fn predict_distribution(&self, inst: &Instance) -> Result<Vec<f64>> {
        let fitted = self
            .fitted
            .as_ref()
            .ok_or_else(|| Error::model("logistic model queried before fit"))?;
        let row = fitted.encoder.encode(inst);
        let stride = row.len() + 1;
        let scores: Vec<f64> = (0..fitted.n_classes)
            .map(|c| {
                let w = &fitted.weights[c * stride..(c + 1) * stride];
                w[row.len()] + row.iter().zip(w).map(|(x, wj)| x * wj).sum::<f64>()
            })
            .collect();
        Ok(softmax(&scores))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{AttributeSpec, Cell};

    fn separable() -> Dataset {
        let schema = vec![AttributeSpec::nominal("x", vec!["a".into(), "b".into()])];
        let mut instances = Vec::new();
        for _ in 0..5 {
            instances.push(Instance::original(vec![Cell::Nominal(0)], 0));
            instances.push(Instance::original(vec![Cell::Nominal(1)], 1));
        }
        Dataset::new("t", schema, "class", vec!["A".into(), "B".into()], instances).unwrap()
    }

    #[test]
    fn separable_data_gets_confident_predictions() {
        let d = separable();
        let mut model = Logistic::new();
        model.fit(&d).unwrap();
        let dist = model
            .predict_distribution(&Instance::original(vec![Cell::Nominal(0)], 0))
            .unwrap();
        assert!(dist[0] > 0.9, "{dist:?}");
        let dist = model
            .predict_distribution(&Instance::original(vec![Cell::Nominal(1)], 1))
            .unwrap();
        assert!(dist[1] > 0.9, "{dist:?}");
    }

    #[test]
    fn zero_weights_give_a_uniform_distribution() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let labels = vec![0, 1];
        let weights = vec![0.0; 2 * 3];
        let (loss, _) = logistic_loss_grad(&weights, &rows, &labels, 2, 0.0);
        assert!((loss - (2.0f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let rows = vec![
            vec![1.0, 0.0, 0.5],
            vec![0.0, 1.0, -0.3],
            vec![1.0, 1.0, 0.1],
            vec![0.0, 0.0, 0.9],
        ];
        let labels = vec![0, 1, 2, 1];
        let n_classes = 3;
        let stride = 4;
        // fixed pseudo-arbitrary weights, nothing special about the values
        let weights: Vec<f64> = (0..n_classes * stride)
            .map(|i| ((i * 37 + 11) % 19) as f64 / 19.0 - 0.5)
            .collect();
        let (_, grad) = logistic_loss_grad(&weights, &rows, &labels, n_classes, 1e-3);
        let eps = 1e-6;
        for i in 0..weights.len() {
            let mut plus = weights.clone();
            plus[i] += eps;
            let mut minus = weights.clone();
            minus[i] -= eps;
            let (lp, _) = logistic_loss_grad(&plus, &rows, &labels, n_classes, 1e-3);
            let (lm, _) = logistic_loss_grad(&minus, &rows, &labels, n_classes, 1e-3);
            let numeric = (lp - lm) / (2.0 * eps);
            let denom = numeric.abs().max(grad[i].abs()).max(1e-8);
            assert!(
                (numeric - grad[i]).abs() / denom < 1e-4,
                "weight {i}: analytic {} vs numeric {numeric}",
                grad[i]
            );
        }
    }

    #[test]
    fn deterministic_across_fits() {
        let d = separable();
        let mut a = Logistic::new();
        let mut b = Logistic::new();
        a.fit(&d).unwrap();
        b.fit(&d).unwrap();
        let q = Instance::original(vec![Cell::Nominal(0)], 0);
        assert_eq!(a.predict_distribution(&q).unwrap(), b.predict_distribution(&q).unwrap());
    }
}
