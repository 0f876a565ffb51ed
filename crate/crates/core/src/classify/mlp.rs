//! Single-hidden-layer perceptron: sigmoid hidden units, softmax output,
//! full-batch backpropagation with momentum.

use rand::Rng;

use crate::data::{Dataset, Instance};
use crate::error::{Error, Result};
use crate::seed::rng_for;

use super::encode::Encoder;
use super::{check_trainable, softmax, Classifier, ClassifierKind};

const LEARNING_RATE: f64 = 0.3;
const MOMENTUM: f64 = 0.2;
const EPOCHS: usize = 500;
const INIT_SPAN: f64 = 0.5;

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Network shape: `hidden × (inputs+1)` weights for the first layer, then
/// `classes × (hidden+1)` for the second, biases in the trailing column,
/// all flattened into one parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MlpShape {
    pub inputs: usize,
    pub hidden: usize,
    pub classes: usize,
}

impl MlpShape {
    pub fn for_data(inputs: usize, classes: usize) -> Self {
        // ceil((inputs + classes) / 2) hidden units, the conventional
        // "between input and output" default
        let hidden = (inputs + classes).div_ceil(2).max(1);
        MlpShape { inputs, hidden, classes }
    }

    pub fn n_params(&self) -> usize {
        self.hidden * (self.inputs + 1) + self.classes * (self.hidden + 1)
    }

    fn w1(&self, h: usize, j: usize) -> usize {
        h * (self.inputs + 1) + j
    }

    fn w2(&self, c: usize, h: usize) -> usize {
        self.hidden * (self.inputs + 1) + c * (self.hidden + 1) + h
    }
}

fn forward(params: &[f64], shape: &MlpShape, row: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut hidden = vec![0.0; shape.hidden];
    for (h, unit) in hidden.iter_mut().enumerate() {
        let mut z = params[shape.w1(h, shape.inputs)];
        for (j, x) in row.iter().enumerate() {
            z += params[shape.w1(h, j)] * x;
        }
        *unit = sigmoid(z);
    }
    let mut scores = vec![0.0; shape.classes];
    for (c, score) in scores.iter_mut().enumerate() {
        let mut z = params[shape.w2(c, shape.hidden)];
        for (h, a) in hidden.iter().enumerate() {
            z += params[shape.w2(c, h)] * a;
        }
        *score = z;
    }
    (hidden, scores)
}

/// Mean cross-entropy over the batch and its backpropagated gradient.
/// Public so tests can check it against central finite differences.
pub fn mlp_loss_grad(
    params: &[f64],
    shape: &MlpShape,
    rows: &[Vec<f64>],
    labels: &[usize],
) -> (f64, Vec<f64>) {
    debug_assert_eq!(params.len(), shape.n_params());
    let n = rows.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; params.len()];
    for (row, &label) in rows.iter().zip(labels) {
        let (hidden, scores) = forward(params, shape, row);
        let probs = softmax(&scores);
        loss -= probs[label].max(f64::MIN_POSITIVE).ln();
        let mut d_hidden = vec![0.0; shape.hidden];
        for (c, &p) in probs.iter().enumerate() {
            let delta = p - if c == label { 1.0 } else { 0.0 };
            for (h, a) in hidden.iter().enumerate() {
                grad[shape.w2(c, h)] += delta * a;
                d_hidden[h] += delta * params[shape.w2(c, h)];
            }
            grad[shape.w2(c, shape.hidden)] += delta;
        }
        for (h, a) in hidden.iter().enumerate() {
            let dz = d_hidden[h] * a * (1.0 - a);
            for (j, x) in row.iter().enumerate() {
                grad[shape.w1(h, j)] += dz * x;
            }
            grad[shape.w1(h, shape.inputs)] += dz;
        }
    }
    loss /= n;
    for g in grad.iter_mut() {
        *g /= n;
    }
    (loss, grad)
}

pub struct Mlp {
    seed: u64,
    fitted: Option<Fitted>,
}

struct Fitted {
    encoder: Encoder,
    shape: MlpShape,
    params: Vec<f64>,
}

impl Mlp {
    pub fn new(seed: u64) -> Self {
        Mlp { seed, fitted: None }
    }
}

impl Classifier for Mlp {
    fn kind(&self) -> ClassifierKind {
        ClassifierKind::Mlp
    }

    fn fit(&mut self, d: &Dataset) -> Result<()> {
        check_trainable(d)?;
        let encoder = Encoder::from_schema(&d.schema);
        let rows: Vec<Vec<f64>> = d.instances.iter().map(|i| encoder.encode(i)).collect();
        let labels = d.labels();
        let shape = MlpShape::for_data(encoder.width(), d.n_classes());
        let mut rng = rng_for(self.seed, "mlp-init", 0);
        let mut params: Vec<f64> = (0..shape.n_params())
            .map(|_| rng.gen_range(-INIT_SPAN..INIT_SPAN))
            .collect();
        let mut velocity = vec![0.0; params.len()];
        for _ in 0..EPOCHS {
            let (_, grad) = mlp_loss_grad(&params, &shape, &rows, &labels);
            for ((p, v), g) in params.iter_mut().zip(velocity.iter_mut()).zip(&grad) {
                *v = MOMENTUM * *v - LEARNING_RATE * g;
                *p += *v;
            }
        }
        self.fitted = Some(Fitted { encoder, shape, params });
        Ok(())
    }

    fn predict_distribution(&self, inst: &Instance) -> Result<Vec<f64>> {
        let fitted = self
            .fitted
            .as_ref()
            .ok_or_else(|| Error::model("mlp queried before fit"))?;
        let row = fitted.encoder.encode(inst);
        let (_, scores) = forward(&fitted.params, &fitted.shape, &row);
        Ok(softmax(&scores))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::predicted_label;
    use crate::data::{AttributeSpec, Cell};

    fn xor_dataset(copies: usize) -> Dataset {
        let schema = vec![
            AttributeSpec::nominal("p", vec!["0".into(), "1".into()]),
            AttributeSpec::nominal("q", vec!["0".into(), "1".into()]),
        ];
        let mut instances = Vec::new();
        for _ in 0..copies {
            for (p, q) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let label = p ^ q;
                instances.push(Instance::original(
                    vec![Cell::Nominal(p), Cell::Nominal(q)],
                    label,
                ));
            }
        }
        Dataset::new("xor", schema, "class", vec!["f".into(), "t".into()], instances).unwrap()
    }

    #[test]
    fn learns_xor() {
        // XOR has well-known bad local minima for tiny nets; the fixed
        // epoch budget means only some initializations escape them, so the
        // test pins an initialization that does.
        let d = xor_dataset(10);
        let mut model = Mlp::new(2);
        model.fit(&d).unwrap();
        for inst in &d.instances {
            let dist = model.predict_distribution(inst).unwrap();
            assert_eq!(predicted_label(&dist), inst.label, "misclassified {:?}", inst.values);
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let shape = MlpShape { inputs: 3, hidden: 2, classes: 2 };
        let rows = vec![vec![0.3, -0.4, 0.9], vec![1.0, 0.2, -0.5], vec![-0.7, 0.8, 0.1]];
        let labels = vec![0, 1, 0];
        let params: Vec<f64> = (0..shape.n_params())
            .map(|i| ((i * 31 + 7) % 23) as f64 / 23.0 - 0.5)
            .collect();
        let (_, grad) = mlp_loss_grad(&params, &shape, &rows, &labels);
        let eps = 1e-6;
        for i in 0..params.len() {
            let mut plus = params.clone();
            plus[i] += eps;
            let mut minus = params.clone();
            minus[i] -= eps;
            let (lp, _) = mlp_loss_grad(&plus, &shape, &rows, &labels);
            let (lm, _) = mlp_loss_grad(&minus, &shape, &rows, &labels);
            let numeric = (lp - lm) / (2.0 * eps);
            let denom = numeric.abs().max(grad[i].abs()).max(1e-8);
            assert!(
                (numeric - grad[i]).abs() / denom < 1e-4,
                "param {i}: analytic {} vs numeric {numeric}",
                grad[i]
            );
        }
    }

    #[test]
    fn same_seed_same_model() {
        let d = xor_dataset(3);
        let mut a = Mlp::new(7);
        let mut b = Mlp::new(7);
        a.fit(&d).unwrap();
        b.fit(&d).unwrap();
        let q = &d.instances[1];
        assert_eq!(a.predict_distribution(q).unwrap(), b.predict_distribution(q).unwrap());
    }

    #[test]
    fn hidden_size_follows_the_halfway_rule() {
        assert_eq!(MlpShape::for_data(4, 2).hidden, 3);
        assert_eq!(MlpShape::for_data(5, 3).hidden, 4);
        assert_eq!(MlpShape::for_data(0, 2).hidden, 1);
    }
}
