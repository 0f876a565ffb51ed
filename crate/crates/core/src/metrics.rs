//! Evaluation measures: misclassification counts, relative absolute error
//! against a class-prior baseline, one-vs-rest rates, and their averages
//! across the classifier group.

use serde::{Deserialize, Serialize};

use crate::classify::{predicted_label, ClassifierKind};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// One-vs-rest confusion counts for a single class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionSummary {
    pub class: String,
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_count: usize,
    pub tp_rate: f64,
    pub tn_rate: f64,
    pub fp_rate: f64,
    pub fn_rate: f64,
    /// true when tp + fn or fp + tn was zero, in which case the affected
    /// rates are reported as 0 instead of NaN
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    Macro,
    Micro,
}

/// Per-class rates plus the classifier-level aggregate under the chosen
/// averaging rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub averaging: Averaging,
    pub per_class: Vec<ConfusionSummary>,
    pub tp_rate: f64,
    pub tn_rate: f64,
    pub fp_rate: f64,
    pub fn_rate: f64,
    pub degenerate_classes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierMetrics {
    pub classifier: ClassifierKind,
    pub ms: usize,
    pub rae: f64,
    pub rates: RateSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMetrics {
    pub ams: f64,
    pub arae: f64,
    pub atp_rate: f64,
    pub atn_rate: f64,
    pub afp_rate: f64,
    pub afn_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EvaluationMode {
    CrossValidation { folds: usize },
    Resubstitution,
}

impl EvaluationMode {
    pub fn label(&self) -> String {
        match self {
            EvaluationMode::CrossValidation { folds } => format!("{folds}-fold-cv"),
            EvaluationMode::Resubstitution => "resubstitution".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub method: String,
    pub seed: u64,
    pub evaluation: EvaluationMode,
    pub classifiers: Vec<ClassifierMetrics>,
    pub group: GroupMetrics,
}

/// Counts instances whose argmax prediction (ties to the lowest class
/// index) disagrees with the label.
pub fn misclassified_count(predictions: &[Vec<f64>], d: &Dataset) -> Result<usize> {
    check_aligned(predictions, d)?;
    Ok(predictions
        .iter()
        .zip(&d.instances)
        .filter(|(dist, inst)| predicted_label(dist) != inst.label)
        .count())
}

pub fn ams(ms_values: &[usize]) -> Result<f64> {
    mean(&ms_values.iter().map(|&v| v as f64).collect::<Vec<_>>(), "MS")
}

pub fn arae(rae_values: &[f64]) -> Result<f64> {
    mean(rae_values, "RAE")
}

/// RAE percentage: total absolute probability error relative to what a
/// classifier that always predicts `baseline_priors` would incur.
pub fn relative_absolute_error(
    predictions: &[Vec<f64>],
    d: &Dataset,
    baseline_priors: &[f64],
) -> Result<f64> {
    check_aligned(predictions, d)?;
    let n_classes = d.class_domain.len();
    if baseline_priors.len() != n_classes {
        return Err(Error::internal(format!(
            "baseline priors cover {} classes, dataset has {n_classes}",
            baseline_priors.len()
        )));
    }
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for (dist, inst) in predictions.iter().zip(&d.instances) {
        if dist.len() != n_classes {
            return Err(Error::internal(format!(
                "prediction has {} entries, dataset has {n_classes} classes",
                dist.len()
            )));
        }
        for c in 0..n_classes {
            let truth = if inst.label == c { 1.0 } else { 0.0 };
            numerator += (dist[c] - truth).abs();
            denominator += (baseline_priors[c] - truth).abs();
        }
    }
    if denominator == 0.0 {
        return Err(Error::data(
            "relative absolute error is undefined: the prior baseline makes no error \
             (single-class data)",
        ));
    }
    Ok(100.0 * numerator / denominator)
}

/// One-vs-rest confusion rates for every domain class. A class with a
/// zero denominator gets rate 0 and lands in `degenerate_classes`.
pub fn class_rates(
    predictions: &[Vec<f64>],
    d: &Dataset,
    averaging: Averaging,
) -> Result<RateSummary> {
    check_aligned(predictions, d)?;
    let predicted: Vec<usize> = predictions.iter().map(|dist| predicted_label(dist)).collect();
    let mut per_class = Vec::with_capacity(d.class_domain.len());
    let mut degenerate_classes = Vec::new();
    for (c, symbol) in d.class_domain.iter().enumerate() {
        let (mut tp, mut tn, mut fp, mut fn_count) = (0usize, 0usize, 0usize, 0usize);
        for (inst, &pred) in d.instances.iter().zip(&predicted) {
            match (inst.label == c, pred == c) {
                (true, true) => tp += 1,
                (true, false) => fn_count += 1,
                (false, true) => fp += 1,
                (false, false) => tn += 1,
            }
        }
        let degenerate = tp + fn_count == 0 || fp + tn == 0;
        if degenerate {
            degenerate_classes.push(symbol.clone());
        }
        per_class.push(ConfusionSummary {
            class: symbol.clone(),
            tp,
            tn,
            fp,
            fn_count,
            tp_rate: ratio(tp, tp + fn_count),
            tn_rate: ratio(tn, tn + fp),
            fp_rate: ratio(fp, fp + tn),
            fn_rate: ratio(fn_count, tp + fn_count),
            degenerate,
        });
    }
    let k = per_class.len() as f64;
    let (tp_rate, tn_rate, fp_rate, fn_rate) = match averaging {
        Averaging::Macro => (
            per_class.iter().map(|r| r.tp_rate).sum::<f64>() / k,
            per_class.iter().map(|r| r.tn_rate).sum::<f64>() / k,
            per_class.iter().map(|r| r.fp_rate).sum::<f64>() / k,
            per_class.iter().map(|r| r.fn_rate).sum::<f64>() / k,
        ),
        Averaging::Micro => {
            let pool = |f: fn(&ConfusionSummary) -> usize| per_class.iter().map(f).sum::<usize>();
            let (tp, tn, fp, fn_count) =
                (pool(|r| r.tp), pool(|r| r.tn), pool(|r| r.fp), pool(|r| r.fn_count));
            (
                ratio(tp, tp + fn_count),
                ratio(tn, tn + fp),
                ratio(fp, fp + tn),
                ratio(fn_count, tp + fn_count),
            )
        }
    };
    Ok(RateSummary { averaging, per_class, tp_rate, tn_rate, fp_rate, fn_rate, degenerate_classes })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupRates {
    pub atp_rate: f64,
    pub atn_rate: f64,
    pub afp_rate: f64,
    pub afn_rate: f64,
}

pub fn group_rates(summaries: &[RateSummary]) -> Result<GroupRates> {
    if summaries.is_empty() {
        return Err(Error::data("cannot average rates over an empty classifier group"));
    }
    let n = summaries.len() as f64;
    Ok(GroupRates {
        atp_rate: summaries.iter().map(|s| s.tp_rate).sum::<f64>() / n,
        atn_rate: summaries.iter().map(|s| s.tn_rate).sum::<f64>() / n,
        afp_rate: summaries.iter().map(|s| s.fp_rate).sum::<f64>() / n,
        afn_rate: summaries.iter().map(|s| s.fn_rate).sum::<f64>() / n,
    })
}

impl EvaluationReport {
    /// Assembles the report so the group block is the exact mean of the
    /// per-classifier blocks.
    pub fn from_parts(
        method: impl Into<String>,
        seed: u64,
        evaluation: EvaluationMode,
        classifiers: Vec<ClassifierMetrics>,
    ) -> Result<Self> {
        let ms: Vec<usize> = classifiers.iter().map(|c| c.ms).collect();
        let rae: Vec<f64> = classifiers.iter().map(|c| c.rae).collect();
        let rates: Vec<RateSummary> = classifiers.iter().map(|c| c.rates.clone()).collect();
        let g = group_rates(&rates)?;
        let group = GroupMetrics {
            ams: ams(&ms)?,
            arae: arae(&rae)?,
            atp_rate: g.atp_rate,
            atn_rate: g.atn_rate,
            afp_rate: g.afp_rate,
            afn_rate: g.afn_rate,
        };
        Ok(EvaluationReport { method: method.into(), seed, evaluation, classifiers, group })
    }

    pub fn csv_header() -> &'static [&'static str] {
        &[
            "method",
            "classifier",
            "seed",
            "evaluation",
            "ms",
            "rae",
            "tp_rate",
            "tn_rate",
            "fp_rate",
            "fn_rate",
            "degenerate_classes",
            "ams",
            "arae",
            "atp_rate",
            "atn_rate",
            "afp_rate",
            "afn_rate",
        ]
    }

    /// One flat row per classifier; the group columns repeat on each row.
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.classifiers
            .iter()
            .map(|c| {
                vec![
                    self.method.clone(),
                    c.classifier.id().to_string(),
                    self.seed.to_string(),
                    self.evaluation.label(),
                    c.ms.to_string(),
                    c.rae.to_string(),
                    c.rates.tp_rate.to_string(),
                    c.rates.tn_rate.to_string(),
                    c.rates.fp_rate.to_string(),
                    c.rates.fn_rate.to_string(),
                    c.rates.degenerate_classes.join(";"),
                    self.group.ams.to_string(),
                    self.group.arae.to_string(),
                    self.group.atp_rate.to_string(),
                    self.group.atn_rate.to_string(),
                    self.group.afp_rate.to_string(),
                    self.group.afn_rate.to_string(),
                ]
            })
            .collect()
    }
}

fn check_aligned(predictions: &[Vec<f64>], d: &Dataset) -> Result<()> {
    if predictions.len() != d.n_instances() {
        return Err(Error::internal(format!(
            "{} predictions for {} instances",
            predictions.len(),
            d.n_instances()
        )));
    }
    Ok(())
}

fn mean(values: &[f64], what: &str) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::data(format!("cannot average an empty {what} sequence")));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

fn ratio(num: usize, denom: usize) -> f64 {
    if denom == 0 {
        0.0
    } else {
        num as f64 / denom as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{AttributeSpec, Cell, Instance};

    fn labeled_dataset(labels: &[usize], domain: &[&str]) -> Dataset {
        let schema = vec![AttributeSpec::nominal("f0", vec!["a".into(), "b".into()])];
        let instances = labels
            .iter()
            .map(|&l| Instance::original(vec![Cell::Nominal(l % 2)], l))
            .collect();
        Dataset::new("t", schema, "class", domain.iter().map(|s| s.to_string()).collect(), instances)
            .unwrap()
    }

    fn one_hot(label: usize, k: usize) -> Vec<f64> {
        (0..k).map(|c| if c == label { 1.0 } else { 0.0 }).collect()
    }

    #[test]
    fn misclassified_count_matches_direct_tally() {
        let d = labeled_dataset(&[0, 1, 0, 1, 0], &["n", "y"]);
        let perfect: Vec<Vec<f64>> = d.instances.iter().map(|i| one_hot(i.label, 2)).collect();
        assert_eq!(misclassified_count(&perfect, &d).unwrap(), 0);
        let inverted: Vec<Vec<f64>> = d.instances.iter().map(|i| one_hot(1 - i.label, 2)).collect();
        assert_eq!(misclassified_count(&inverted, &d).unwrap(), 5);
        let mut three_right = perfect.clone();
        three_right[1] = one_hot(0, 2);
        three_right[3] = one_hot(0, 2);
        assert_eq!(misclassified_count(&three_right, &d).unwrap(), 2);
        assert!(misclassified_count(&perfect[..3], &d).is_err());
    }

    #[test]
    fn argmax_ties_go_to_the_lowest_class() {
        let d = labeled_dataset(&[0, 1], &["n", "y"]);
        let flat = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        assert_eq!(misclassified_count(&flat, &d).unwrap(), 1);
    }

    #[test]
    fn averages_are_plain_means() {
        assert_eq!(ams(&[3, 5, 4, 6, 2]).unwrap(), 4.0);
        assert_eq!(ams(&[7]).unwrap(), 7.0);
        assert_eq!(ams(&[0, 0, 0, 0, 0]).unwrap(), 0.0);
        assert!(ams(&[]).is_err());
        assert_eq!(arae(&[10.0, 20.0, 30.0]).unwrap(), 20.0);
        assert_eq!(arae(&[15.0]).unwrap(), 15.0);
        assert_eq!(arae(&[33.3; 5]).unwrap(), 33.3);
        assert!(arae(&[]).is_err());
    }

    #[test]
    fn rae_hand_example_is_eighty_percent() {
        let d = labeled_dataset(&[0, 1], &["a", "b"]);
        let preds = vec![vec![0.8, 0.2], vec![0.6, 0.4]];
        let rae = relative_absolute_error(&preds, &d, &[0.5, 0.5]).unwrap();
        assert!((rae - 80.0).abs() < 1e-9, "{rae}");
    }

    #[test]
    fn rae_extremes() {
        let d = labeled_dataset(&[0, 0, 0, 1, 1], &["a", "b"]);
        let priors = [0.6, 0.4];
        let perfect: Vec<Vec<f64>> = d.instances.iter().map(|i| one_hot(i.label, 2)).collect();
        assert_eq!(relative_absolute_error(&perfect, &d, &priors).unwrap(), 0.0);
        let prior_predictor: Vec<Vec<f64>> = (0..5).map(|_| priors.to_vec()).collect();
        let rae = relative_absolute_error(&prior_predictor, &d, &priors).unwrap();
        assert!((rae - 100.0).abs() < 1e-9, "{rae}");
    }

    #[test]
    fn rae_rejects_degenerate_baseline() {
        // every label matches a degenerate prior, so the baseline error is 0
        let d = labeled_dataset(&[0, 0, 0], &["a", "b"]);
        let preds = vec![vec![1.0, 0.0]; 3];
        assert!(relative_absolute_error(&preds, &d, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn one_vs_rest_rates_from_counts() {
        // 10 of class a (8 predicted right), 20 of class b (one stray a).
        let labels: Vec<usize> = std::iter::repeat_n(0, 10).chain(std::iter::repeat_n(1, 20)).collect();
        let d = labeled_dataset(&labels, &["a", "b"]);
        let mut preds: Vec<Vec<f64>> = d.instances.iter().map(|i| one_hot(i.label, 2)).collect();
        preds[8] = one_hot(1, 2);
        preds[9] = one_hot(1, 2);
        preds[10] = one_hot(0, 2);
        let rates = class_rates(&preds, &d, Averaging::Macro).unwrap();
        let a = &rates.per_class[0];
        assert_eq!((a.tp, a.fn_count, a.fp, a.tn), (8, 2, 1, 19));
        assert_eq!(a.tp + a.tn + a.fp + a.fn_count, 30);
        assert!((a.tp_rate - 0.8).abs() < 1e-12);
        assert!((a.fn_rate - 0.2).abs() < 1e-12);
        assert!((a.fp_rate - 0.05).abs() < 1e-12);
        assert!((a.tn_rate - 0.95).abs() < 1e-12);
        assert!(rates.degenerate_classes.is_empty());
    }

    fn three_class_fixture() -> (Dataset, Vec<Vec<f64>>) {
        // confusion rows: A: 3A,1B,0C; B: 0A,4B,0C; C: 1A,0B,1C
        let labels = vec![0, 0, 0, 0, 1, 1, 1, 1, 2, 2];
        let d = labeled_dataset(&labels, &["A", "B", "C"]);
        let predicted = vec![0, 0, 0, 1, 1, 1, 1, 1, 0, 2];
        let preds = predicted.into_iter().map(|p| one_hot(p, 3)).collect();
        (d, preds)
    }

    #[test]
    fn macro_average_over_three_classes() {
        let (d, preds) = three_class_fixture();
        let rates = class_rates(&preds, &d, Averaging::Macro).unwrap();
        let tps: Vec<f64> = rates.per_class.iter().map(|r| r.tp_rate).collect();
        assert_eq!(tps, vec![0.75, 1.0, 0.5]);
        assert_eq!(rates.tp_rate, 0.75);
        for r in &rates.per_class {
            assert!((r.tp_rate + r.fn_rate - 1.0).abs() < 1e-12);
            assert!((r.fp_rate + r.tn_rate - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn micro_average_pools_counts() {
        let (d, preds) = three_class_fixture();
        let rates = class_rates(&preds, &d, Averaging::Micro).unwrap();
        assert!((rates.tp_rate - 0.8).abs() < 1e-12, "{}", rates.tp_rate);
        assert!((rates.tp_rate + rates.fn_rate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn absent_class_is_flagged_not_nan() {
        let d = labeled_dataset(&[0, 0, 1], &["a", "b", "ghost"]);
        let preds: Vec<Vec<f64>> = d.instances.iter().map(|i| one_hot(i.label, 3)).collect();
        let rates = class_rates(&preds, &d, Averaging::Macro).unwrap();
        assert_eq!(rates.degenerate_classes, vec!["ghost".to_string()]);
        let ghost = &rates.per_class[2];
        assert_eq!(ghost.tp_rate, 0.0);
        assert!(rates.per_class.iter().all(|r| r.tp_rate.is_finite()));
    }

    #[test]
    fn group_rates_average_classifier_rates() {
        let (d, preds) = three_class_fixture();
        let perfect: Vec<Vec<f64>> = d.instances.iter().map(|i| one_hot(i.label, 3)).collect();
        let a = class_rates(&perfect, &d, Averaging::Macro).unwrap();
        let b = class_rates(&preds, &d, Averaging::Macro).unwrap();
        let g = group_rates(&[a.clone(), b.clone()]).unwrap();
        assert!((g.atp_rate - (a.tp_rate + b.tp_rate) / 2.0).abs() < 1e-12);
        assert!((g.atp_rate - 0.875).abs() < 1e-12);
        assert!(group_rates(&[]).is_err());
        let five = vec![a.clone(); 5];
        assert_eq!(group_rates(&five).unwrap().atp_rate, a.tp_rate);
    }

    #[test]
    fn report_group_block_is_the_exact_mean() {
        let (d, preds) = three_class_fixture();
        let perfect: Vec<Vec<f64>> = d.instances.iter().map(|i| one_hot(i.label, 3)).collect();
        let mk = |kind, preds: &Vec<Vec<f64>>| ClassifierMetrics {
            classifier: kind,
            ms: misclassified_count(preds, &d).unwrap(),
            rae: relative_absolute_error(preds, &d, &[0.4, 0.4, 0.2]).unwrap(),
            rates: class_rates(preds, &d, Averaging::Macro).unwrap(),
        };
        let parts = vec![
            mk(ClassifierKind::NaiveBayes, &perfect),
            mk(ClassifierKind::Logistic, &preds),
        ];
        let report = EvaluationReport::from_parts(
            "all_features",
            42,
            EvaluationMode::CrossValidation { folds: 10 },
            parts.clone(),
        )
        .unwrap();
        let expect_ams = (parts[0].ms + parts[1].ms) as f64 / 2.0;
        assert_eq!(report.group.ams, expect_ams);
        assert_eq!(report.group.arae, (parts[0].rae + parts[1].rae) / 2.0);
        assert!((report.group.atp_rate + report.group.afn_rate - 1.0).abs() < 1e-12);

        let json = serde_json::to_string(&report).unwrap();
        let back: EvaluationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
        assert!(json.contains("\"fn\""), "confusion counts use the short key");

        let rows = report.csv_rows();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].len(), EvaluationReport::csv_header().len());
        assert_eq!(rows[0][0], "all_features");
        assert_eq!(rows[1][1], "logistic");
    }
}
