//! Orchestration: Phase 1 resampling, Phase 2 selection, the five-method
//! comparison harness, and the report/series writers.

mod config;
mod outputs;

pub use config::{
    DataConfig, DataFormat, GaConfig, Method, PipelineConfig, RankConfig, RunConfig, SmoteConfig,
    DEFAULT_OUTER_FOLDS, DEFAULT_SEED, DEFAULT_WRAPPER_FOLDS,
};
pub use outputs::write_outputs;

use std::fs::File;

use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{build_classifier, cross_validate, resubstitute, ClassifierKind};
use crate::data::{
    impute_missing, load_arff_with_class, load_csv, stratified_folds, Dataset, FoldPlan,
};
use crate::error::{Error, Result};
use crate::ga::{evolve, GenerationStats};
use crate::metrics::{
    class_rates, misclassified_count, relative_absolute_error, ClassifierMetrics,
    EvaluationMode, EvaluationReport,
};
use crate::rank::{rank_features_by, select_above_threshold, select_top_k, FeatureScore, Measure};
use crate::resample::{
    balance_dataset, merge_with_original, misclassification_filter, SmoteParams,
};
use crate::seed::derive_seed;

/// Loads and imputes the configured dataset. Imputation runs before any
/// other stage so distances, entropies, and classifier training all see
/// complete cells.
pub fn load_dataset(data: &DataConfig) -> Result<Dataset> {
    let file = File::open(&data.path)?;
    let raw = match data.format {
        DataFormat::Arff => load_arff_with_class(file, data.class_column)?,
        DataFormat::Csv => {
            let class = data
                .class_column
                .ok_or_else(|| Error::config("csv input needs --class-col"))?;
            load_csv(file, class, None)?
        }
    };
    impute_missing(&raw)
}

/// Step sizes of one Phase 1 run, for the run log and the JSON report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Phase1Summary {
    pub input_instances: usize,
    pub generated: usize,
    pub after_balance: usize,
    pub removed_by_filter: usize,
    pub output_instances: usize,
    pub warnings: Vec<String>,
}

fn phase1_with_params(
    d: &Dataset,
    params: &SmoteParams,
    cfg: &PipelineConfig,
) -> Result<(Dataset, Phase1Summary)> {
    let outcome = balance_dataset(d, params)?;
    let after_balance = outcome.dataset.n_instances();
    let (filtered, removed) = misclassification_filter(&outcome.dataset, cfg.smote.filter_scope)?;
    let merged = merge_with_original(d, &filtered)?;
    let summary = Phase1Summary {
        input_instances: d.n_instances(),
        generated: outcome.generated.iter().sum(),
        after_balance,
        removed_by_filter: removed,
        output_instances: merged.n_instances(),
        warnings: outcome.warnings,
    };
    Ok((merged, summary))
}

/// Phase 1: oversample toward balance, drop synthetic candidates that
/// Naive Bayes misclassifies, and merge survivors onto the originals.
pub fn run_phase1(d: &Dataset, cfg: &PipelineConfig) -> Result<(Dataset, Phase1Summary)> {
    phase1_with_params(d, &cfg.smote_params(), cfg)
}

/// Ranking table, post-threshold pool, and wrapper outcome of one Phase 2
/// run.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase2Summary {
    pub scores: Vec<FeatureScore>,
    /// post-threshold feature indices, best score first
    pub candidates: Vec<usize>,
    pub best_fitness: f64,
    pub evaluations: usize,
    pub trace: Vec<GenerationStats>,
}

fn shortlist(scores: &[FeatureScore], cfg: &PipelineConfig) -> Result<Vec<usize>> {
    match cfg.rank.top_k {
        Some(k) => select_top_k(scores, k),
        None => select_above_threshold(scores, cfg.rank.threshold),
    }
}

fn wrapper_search(
    d: &Dataset,
    measure: Measure,
    prefilter: bool,
    cfg: &PipelineConfig,
) -> Result<(Vec<usize>, Phase2Summary)> {
    let scores = rank_features_by(d, measure)?;
    let candidates = if prefilter {
        shortlist(&scores, cfg)?
    } else {
        scores.iter().map(|s| s.attribute).collect()
    };
    let folds = stratified_folds(d, cfg.run.wrapper_folds, derive_seed(cfg.run.seed, "wrapper-folds", 0))?;
    let outcome = evolve(&candidates, d, &folds, &cfg.ga_params())?;
    let summary = Phase2Summary {
        scores,
        candidates,
        best_fitness: outcome.best_fitness,
        evaluations: outcome.evaluations,
        trace: outcome.trace,
    };
    Ok((outcome.selected, summary))
}

/// Phase 2: information-gain threshold filter, then the GA wrapper over
/// the survivors. Returns the chosen attribute indices, ascending.
pub fn run_phase2(d: &Dataset, cfg: &PipelineConfig) -> Result<(Vec<usize>, Phase2Summary)> {
    wrapper_search(d, Measure::InfoGain, true, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaSummary {
    /// post-threshold candidate pool, best score first
    pub candidates: Vec<usize>,
    pub best_fitness: f64,
    pub evaluations: usize,
    #[serde(skip)]
    pub trace: Vec<GenerationStats>,
}

/// Everything one method run produces: the selection, the evaluation
/// report, and log material.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodRun {
    pub method: Method,
    pub n_features_total: usize,
    pub selected: Vec<usize>,
    pub selected_names: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase1: Option<Phase1Summary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ga: Option<GaSummary>,
    pub report: EvaluationReport,
    #[serde(skip)]
    pub log: Vec<String>,
}

/// Runs one method against an already-loaded dataset.
///
/// Method semantics: `all_features` evaluates everything as-is;
/// `info_gain` keeps the threshold survivors; `ga_wrapper` evolves over
/// all features (rank order only seeds the ladder); `su_ga_wrapper`
/// thresholds an SU ranking before evolving; `hybrid` runs Phase 1 and
/// then Phase 2 on the merged dataset. Baselines run on the raw dataset;
/// only `hybrid` sees resampled data.
pub fn run_method_on(raw: &Dataset, cfg: &PipelineConfig) -> Result<MethodRun> {
    let method = cfg.run.method;
    let mut log = vec![
        format!("method: {method}"),
        format!(
            "dataset: {} ({} instances, {} attributes, {} classes)",
            raw.relation,
            raw.n_instances(),
            raw.n_attributes(),
            raw.n_classes()
        ),
    ];

    let mut phase1 = None;
    let mut ga = None;
    let (d_eval, selected): (Dataset, Vec<usize>) = match method {
        Method::AllFeatures => (raw.clone(), (0..raw.n_attributes()).collect()),
        Method::InfoGain => {
            let scores = rank_features_by(raw, Measure::InfoGain)?;
            let mut picked = shortlist(&scores, cfg)?;
            log.push(format!(
                "ranking: {} features scored, {} kept",
                scores.len(),
                picked.len()
            ));
            picked.sort_unstable();
            (raw.clone(), picked)
        }
        Method::GaWrapper => {
            let (picked, p2) = wrapper_search(raw, Measure::InfoGain, false, cfg)?;
            log.push(format!(
                "ga: {} candidates, {} evaluations, best fitness {:.4}",
                p2.candidates.len(),
                p2.evaluations,
                p2.best_fitness
            ));
            ga = Some(GaSummary {
                candidates: p2.candidates,
                best_fitness: p2.best_fitness,
                evaluations: p2.evaluations,
                trace: p2.trace,
            });
            (raw.clone(), picked)
        }
        Method::SuGaWrapper => {
            let (picked, p2) = wrapper_search(raw, Measure::SymmetricalUncertainty, true, cfg)?;
            log.push(format!(
                "ranking: su threshold kept {} of {}",
                p2.candidates.len(),
                p2.scores.len()
            ));
            log.push(format!(
                "ga: {} evaluations, best fitness {:.4}",
                p2.evaluations, p2.best_fitness
            ));
            ga = Some(GaSummary {
                candidates: p2.candidates,
                best_fitness: p2.best_fitness,
                evaluations: p2.evaluations,
                trace: p2.trace,
            });
            (raw.clone(), picked)
        }
        Method::Hybrid => {
            let (merged, p1) = run_phase1(raw, cfg)?;
            log.push(format!(
                "phase 1: {} -> {} after balance (+{} synthetic), filter removed {}, merged {}",
                p1.input_instances,
                p1.after_balance,
                p1.generated,
                p1.removed_by_filter,
                p1.output_instances
            ));
            for w in &p1.warnings {
                log.push(format!("phase 1 warning: {w}"));
            }
            phase1 = Some(p1);
            let (picked, p2) = run_phase2(&merged, cfg)?;
            log.push(format!(
                "phase 2: ig threshold kept {} of {}",
                p2.candidates.len(),
                p2.scores.len()
            ));
            log.push(format!(
                "ga: {} evaluations, best fitness {:.4}",
                p2.evaluations, p2.best_fitness
            ));
            ga = Some(GaSummary {
                candidates: p2.candidates,
                best_fitness: p2.best_fitness,
                evaluations: p2.evaluations,
                trace: p2.trace,
            });
            (merged, picked)
        }
    };

    let selected_names: Vec<String> =
        selected.iter().map(|&a| raw.schema[a].name.clone()).collect();
    log.push(format!("selected {} of {} features", selected.len(), raw.n_attributes()));

    let per_fold_phase1 = cfg.run.leak_free && method == Method::Hybrid;
    let report = evaluate_selected(raw, &d_eval, &selected, per_fold_phase1, cfg, &mut log)?;

    Ok(MethodRun {
        method,
        n_features_total: raw.n_attributes(),
        selected,
        selected_names,
        phase1,
        ga,
        report,
        log,
    })
}

/// Loads the configured dataset and runs its method.
pub fn run_method(cfg: &PipelineConfig) -> Result<MethodRun> {
    cfg.validate()?;
    let raw = load_dataset(&cfg.data)?;
    run_method_on(&raw, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub dataset: String,
    pub n_instances: usize,
    pub n_attributes: usize,
    pub seed: u64,
    pub runs: Vec<MethodRun>,
}

/// Runs several configs (differing only in method) against one loaded
/// dataset. Runs execute in parallel; output order follows input order.
pub fn compare_methods_on(raw: &Dataset, cfgs: &[PipelineConfig]) -> Result<Comparison> {
    let first = cfgs
        .first()
        .ok_or_else(|| Error::config("no methods to compare"))?;
    for cfg in cfgs {
        if cfg.data != first.data || cfg.run.seed != first.run.seed {
            return Err(Error::config(
                "compared runs must share the same dataset and seed",
            ));
        }
    }
    let runs: Vec<MethodRun> = cfgs
        .par_iter()
        .map(|cfg| run_method_on(raw, cfg))
        .collect::<Result<_>>()?;
    Ok(Comparison {
        dataset: raw.relation.clone(),
        n_instances: raw.n_instances(),
        n_attributes: raw.n_attributes(),
        seed: first.run.seed,
        runs,
    })
}

/// Loads the shared dataset and compares the configured methods.
pub fn compare_methods(cfgs: &[PipelineConfig]) -> Result<Comparison> {
    for cfg in cfgs {
        cfg.validate()?;
    }
    let first = cfgs
        .first()
        .ok_or_else(|| Error::config("no methods to compare"))?;
    let raw = load_dataset(&first.data)?;
    compare_methods_on(&raw, cfgs)
}

/// Mean of the per-fold training-split class frequencies; the RAE
/// baseline under cross-validation.
fn fold_mean_priors(labels: &[usize], n_classes: usize, plan: &FoldPlan) -> Vec<f64> {
    let mut acc = vec![0.0; n_classes];
    for fold in 0..plan.k {
        let (train, _) = plan.split(fold);
        let mut counts = vec![0usize; n_classes];
        for &i in &train {
            counts[labels[i]] += 1;
        }
        for c in 0..n_classes {
            acc[c] += counts[c] as f64 / train.len() as f64;
        }
    }
    acc.iter().map(|a| a / plan.k as f64).collect()
}

fn whole_dataset_priors(d: &Dataset) -> Vec<f64> {
    let n = d.n_instances() as f64;
    d.class_counts().iter().map(|&c| c as f64 / n).collect()
}

/// test-fold indices, their predictions, and the training-fold priors
type FoldPredictions = (Vec<usize>, Vec<Vec<f64>>, Vec<f64>);

/// Cross-validation that re-runs Phase 1 inside each training fold, so
/// synthetic instances never reach a test fold. The fold plan and the
/// predictions cover the raw dataset; the returned priors are the mean
/// class frequencies of the augmented training folds.
fn leak_free_cv(
    kind: ClassifierKind,
    raw: &Dataset,
    raw_projected: &Dataset,
    selected: &[usize],
    plan: &FoldPlan,
    cfg: &PipelineConfig,
    kind_seed: u64,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let base = cfg.smote_params();
    let per_fold: Vec<FoldPredictions> = (0..plan.k)
        .into_par_iter()
        .map(|fold| {
            let (train_idx, test_idx) = plan.split(fold);
            let train_raw = raw.subset(&train_idx)?;
            let params = SmoteParams {
                seed: derive_seed(cfg.run.seed, "leak-free-phase1", fold as u64),
                ..base.clone()
            };
            let (train_aug, _) = phase1_with_params(&train_raw, &params, cfg)?;
            let train_proj = train_aug.project(selected)?;
            let mut model = build_classifier(kind, derive_seed(kind_seed, "fold-model", fold as u64));
            model.fit(&train_proj)?;
            let dists = test_idx
                .iter()
                .map(|&i| model.predict_distribution(&raw_projected.instances[i]))
                .collect::<Result<Vec<_>>>()?;
            Ok((test_idx, dists, whole_dataset_priors(&train_aug)))
        })
        .collect::<Result<_>>()?;
    let mut preds = vec![Vec::new(); raw.n_instances()];
    let mut priors = vec![0.0; raw.n_classes()];
    for (test_idx, dists, fold_priors) in per_fold {
        for (i, dist) in test_idx.into_iter().zip(dists) {
            preds[i] = dist;
        }
        for c in 0..priors.len() {
            priors[c] += fold_priors[c] / plan.k as f64;
        }
    }
    Ok((preds, priors))
}

fn evaluate_selected(
    raw: &Dataset,
    d_eval: &Dataset,
    selected: &[usize],
    per_fold_phase1: bool,
    cfg: &PipelineConfig,
    log: &mut Vec<String>,
) -> Result<EvaluationReport> {
    let mode = if cfg.run.resubstitution {
        EvaluationMode::Resubstitution
    } else {
        EvaluationMode::CrossValidation { folds: cfg.run.outer_folds }
    };
    log.push(format!("evaluation: {}{}", mode.label(), if per_fold_phase1 { ", leak-free" } else { "" }));

    // the leak-free protocol scores on the raw instances; the default
    // protocol scores on whatever the method produced
    let scored = if per_fold_phase1 && !cfg.run.resubstitution { raw } else { d_eval };
    let projected = scored.project(selected)?;
    let plan = if cfg.run.resubstitution {
        None
    } else {
        Some(stratified_folds(
            scored,
            cfg.run.outer_folds,
            derive_seed(cfg.run.seed, "outer-folds", 0),
        )?)
    };

    let mut classifiers = Vec::with_capacity(ClassifierKind::ALL.len());
    for kind in ClassifierKind::ALL {
        let kind_seed = derive_seed(cfg.run.seed, kind.id(), 0);
        let (preds, priors) = match (&plan, per_fold_phase1) {
            (None, _) => (resubstitute(kind, &projected, kind_seed)?, whole_dataset_priors(&projected)),
            (Some(plan), false) => (
                cross_validate(kind, &projected, plan, kind_seed)?,
                fold_mean_priors(&projected.labels(), projected.n_classes(), plan),
            ),
            (Some(plan), true) => {
                leak_free_cv(kind, raw, &projected, selected, plan, cfg, kind_seed)?
            }
        };
        let ms = misclassified_count(&preds, &projected)?;
        let rae = relative_absolute_error(&preds, &projected, &priors)?;
        let rates = class_rates(&preds, &projected, cfg.run.averaging)?;
        log.push(format!("  {}: ms={} rae={:.4}", kind.id(), ms, rae));
        classifiers.push(ClassifierMetrics { classifier: kind, ms, rae, rates });
    }
    let report =
        EvaluationReport::from_parts(cfg.run.method.label(), cfg.run.seed, mode, classifiers)?;
    log.push(format!(
        "group: ams={:.4} arae={:.4} atp={:.4} afp={:.4}",
        report.group.ams, report.group.arae, report.group.atp_rate, report.group.afp_rate
    ));
    Ok(report)
}
