//! Built-in invariant battery behind the `selftest` subcommand: quick,
//! deterministic checks of the core algebraic properties, runnable on any
//! install without test tooling.

use rand::Rng;

use crate::classify::{build_classifier, ClassifierKind};
use crate::data::{AttributeSpec, Cell, Dataset, Instance};
use crate::error::Result;
use crate::ga::{evolve, GaParams};
use crate::metrics::{ams, class_rates, relative_absolute_error, Averaging};
use crate::pipeline::{run_method_on, Method, PipelineConfig};
use crate::rank::{entropy, info_gain, symmetrical_uncertainty};
use crate::resample::{balance_dataset, smote_class_traced, SmoteParams};
use crate::seed::rng_for;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

/// Runs every check; failures carry the offending value in `detail`.
pub fn run_selftest() -> Vec<Check> {
    vec![
        check("entropy-bounds", entropy_bounds),
        check("info-gain-symmetry", ig_symmetry),
        check("info-gain-extremes", ig_extremes),
        check("su-range", su_range),
        check("smote-balance", smote_balance),
        check("smote-convexity", smote_convexity),
        check("ga-budget-monotonicity", ga_budget),
        check("metric-identities", metric_identities),
        check("classifier-distributions", classifier_validity),
        check("pipeline-determinism", pipeline_determinism),
    ]
}

fn check(name: &'static str, body: fn() -> Result<String>) -> Check {
    match body() {
        Ok(detail) => Check { name, passed: true, detail },
        Err(e) => Check { name, passed: false, detail: e.to_string() },
    }
}

fn fail(msg: String) -> crate::error::Error {
    crate::error::Error::internal(msg)
}

fn nominal_dataset(rows: &[(Vec<usize>, usize)], arities: &[usize], n_classes: usize) -> Dataset {
    let schema = arities
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            AttributeSpec::nominal(format!("a{i}"), (0..a).map(|v| format!("v{v}")).collect())
        })
        .collect();
    let instances = rows
        .iter()
        .map(|(vals, label)| {
            Instance::original(vals.iter().map(|&v| Cell::Nominal(v)).collect(), *label)
        })
        .collect();
    let domain = (0..n_classes).map(|c| format!("c{c}")).collect();
    Dataset::new("selftest", schema, "class", domain, instances).unwrap()
}

/// Random (attribute, class) table plus its transpose, for symmetry
/// checks.
fn random_pair(seed: u64) -> (Dataset, Dataset) {
    let mut rng = rng_for(seed, "selftest-table", 0);
    let xa = rng.gen_range(2..=4usize);
    let ya = rng.gen_range(2..=4usize);
    let n = rng.gen_range(20..=60usize);
    let pairs: Vec<(usize, usize)> =
        (0..n).map(|_| (rng.gen_range(0..xa), rng.gen_range(0..ya))).collect();
    let forward: Vec<(Vec<usize>, usize)> = pairs.iter().map(|&(x, y)| (vec![x], y)).collect();
    let backward: Vec<(Vec<usize>, usize)> = pairs.iter().map(|&(x, y)| (vec![y], x)).collect();
    (nominal_dataset(&forward, &[xa], ya), nominal_dataset(&backward, &[ya], xa))
}

fn entropy_bounds() -> Result<String> {
    let uniform: Vec<usize> = (0..64).map(|i| i % 8).collect();
    let h = entropy(&uniform)?;
    if (h - 3.0).abs() > 1e-12 {
        return Err(fail(format!("uniform 8-symbol entropy {h}, want 3")));
    }
    let constant = entropy(&[1usize; 10])?;
    if constant != 0.0 {
        return Err(fail(format!("constant entropy {constant}, want 0")));
    }
    let mut rng = rng_for(0, "selftest-entropy", 0);
    for _ in 0..50 {
        let k = rng.gen_range(2..=6usize);
        let vals: Vec<usize> = (0..40).map(|_| rng.gen_range(0..k)).collect();
        let h = entropy(&vals)?;
        if h < 0.0 || h > (k as f64).log2() + 1e-12 {
            return Err(fail(format!("entropy {h} outside [0, log2 {k}]")));
        }
    }
    Ok("uniform, constant, and 50 random vectors in bounds".into())
}

fn ig_symmetry() -> Result<String> {
    let mut worst = 0.0f64;
    for seed in 0..200u64 {
        let (fwd, bwd) = random_pair(seed);
        let gap = (info_gain(&fwd, 0)? - info_gain(&bwd, 0)?).abs();
        worst = worst.max(gap);
    }
    if worst >= 1e-9 {
        return Err(fail(format!("max asymmetry {worst:.3e}")));
    }
    Ok(format!("200 random tables, max asymmetry {worst:.2e}"))
}

fn ig_extremes() -> Result<String> {
    // attribute 0 copies the class, attribute 1 cycles independently
    let rows: Vec<(Vec<usize>, usize)> =
        (0..60).map(|i| (vec![(i / 3) % 2, i % 3], (i / 3) % 2)).collect();
    let d = nominal_dataset(&rows, &[2, 3], 2);
    let h_y = entropy(&d.labels())?;
    let copy = info_gain(&d, 0)?;
    if (copy - h_y).abs() > 1e-9 {
        return Err(fail(format!("IG of class copy {copy}, want H(Y) {h_y}")));
    }
    let indep = info_gain(&d, 1)?;
    if indep.abs() > 1e-9 {
        return Err(fail(format!("IG of independent attribute {indep}, want 0")));
    }
    Ok(format!("copy -> {copy:.6} = H(Y), independent -> {indep:.1e}"))
}

fn su_range() -> Result<String> {
    for seed in 0..100u64 {
        let (fwd, _) = random_pair(seed);
        let su = symmetrical_uncertainty(&fwd, 0)?;
        if !(0.0..=1.0).contains(&su) {
            return Err(fail(format!("SU {su} outside [0, 1]")));
        }
    }
    let rows: Vec<(Vec<usize>, usize)> = (0..20).map(|i| (vec![i % 2], i % 2)).collect();
    let d = nominal_dataset(&rows, &[2], 2);
    let su = symmetrical_uncertainty(&d, 0)?;
    if (su - 1.0).abs() > 1e-12 {
        return Err(fail(format!("SU of class copy {su}, want 1")));
    }
    Ok("100 random tables in [0,1]; class copy = 1".into())
}

fn imbalanced_fixture(seed: u64) -> Dataset {
    let mut rng = rng_for(seed, "selftest-imbalanced", 0);
    let counts = [4usize, 9, 6];
    let mut rows = Vec::new();
    for (label, &count) in counts.iter().enumerate() {
        for _ in 0..count {
            let mut vals = vec![label];
            vals.extend((0..3).map(|_| rng.gen_range(0..3usize)));
            rows.push((vals, label));
        }
    }
    nominal_dataset(&rows, &[3, 3, 3, 3], 3)
}

fn smote_balance() -> Result<String> {
    let d = imbalanced_fixture(1);
    let outcome = balance_dataset(&d, &SmoteParams::balance(7))?;
    let counts = outcome.dataset.class_counts();
    if counts.iter().any(|&c| c != 9) {
        return Err(fail(format!("class counts after balance {counts:?}, want all 9")));
    }
    Ok(format!("counts {:?} -> {counts:?}", d.class_counts()))
}

fn smote_convexity() -> Result<String> {
    let mut rng = rng_for(2, "selftest-numeric", 0);
    let rows: Vec<Instance> = (0..12)
        .map(|i| {
            let label = i % 2;
            let vals = vec![
                Cell::Numeric(label as f64 * 4.0 + rng.gen::<f64>()),
                Cell::Numeric(rng.gen::<f64>() * 10.0),
            ];
            Instance::original(vals, label)
        })
        .collect();
    let schema = vec![AttributeSpec::numeric("x"), AttributeSpec::numeric("y")];
    let d = Dataset::new("numeric", schema, "class", vec!["a".into(), "b".into()], rows).unwrap();
    let params = SmoteParams::balance(3);
    let (synth, records) = smote_class_traced(&d, 0, 20, &params)?;
    for (inst, rec) in synth.iter().zip(&records) {
        for a in 0..2 {
            let v = inst.values[a].as_numeric().unwrap();
            let x = d.instances[rec.base].values[a].as_numeric().unwrap();
            let n = d.instances[rec.neighbor].values[a].as_numeric().unwrap();
            let (lo, hi) = (x.min(n), x.max(n));
            if v < lo - 1e-9 || v > hi + 1e-9 {
                return Err(fail(format!("synthetic value {v} outside [{lo}, {hi}]")));
            }
        }
    }
    Ok("20 synthetics, every cell within its generating segment".into())
}

fn ga_budget() -> Result<String> {
    let d = imbalanced_fixture(4);
    let folds = crate::data::stratified_folds(&d, 3, 0)?;
    let params = GaParams {
        population_size: 6,
        max_generations: 4,
        ..GaParams::defaults(5)
    };
    let candidates: Vec<usize> = (0..d.n_attributes()).collect();
    let out = evolve(&candidates, &d, &folds, &params)?;
    let budget = params.population_size * (params.max_generations + 1);
    if out.evaluations > budget {
        return Err(fail(format!("{} evaluations, budget {budget}", out.evaluations)));
    }
    let bests: Vec<f64> = out.trace.iter().map(|t| t.best_fitness).collect();
    if bests.windows(2).any(|w| w[1] < w[0]) {
        return Err(fail(format!("best-ever fitness decreased: {bests:?}")));
    }
    Ok(format!("{} evaluations <= {budget}, best trace non-decreasing", out.evaluations))
}

fn metric_identities() -> Result<String> {
    let mut rng = rng_for(6, "selftest-metrics", 0);
    for round in 0..100u64 {
        let n_classes = rng.gen_range(2..=4usize);
        let n = rng.gen_range(6..=30usize);
        let rows: Vec<(Vec<usize>, usize)> =
            (0..n).map(|i| (vec![i % 2], i % n_classes)).collect();
        let d = nominal_dataset(&rows, &[2], n_classes);
        let preds: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let p = rng.gen_range(0..n_classes);
                (0..n_classes).map(|c| if c == p { 1.0 } else { 0.0 }).collect()
            })
            .collect();
        let rates = class_rates(&preds, &d, Averaging::Macro)?;
        for r in &rates.per_class {
            if !r.degenerate
                && ((r.tp_rate + r.fn_rate - 1.0).abs() > 1e-12
                    || (r.fp_rate + r.tn_rate - 1.0).abs() > 1e-12)
            {
                return Err(fail(format!("rate complement broken in round {round}")));
            }
        }
        let priors: Vec<f64> = {
            let counts = d.class_counts();
            counts.iter().map(|&c| c as f64 / n as f64).collect()
        };
        let prior_preds: Vec<Vec<f64>> = (0..n).map(|_| priors.clone()).collect();
        let rae = relative_absolute_error(&prior_preds, &d, &priors)?;
        if (rae - 100.0).abs() > 1e-9 {
            return Err(fail(format!("prior predictor RAE {rae}, want 100")));
        }
    }
    let vals: Vec<usize> = (0..7).map(|_| rng.gen_range(0..20usize)).collect();
    let mean = ams(&vals)?;
    let direct = vals.iter().sum::<usize>() as f64 / 7.0;
    if (mean - direct).abs() > 1e-12 {
        return Err(fail(format!("ams {mean} != direct mean {direct}")));
    }
    Ok("100 random fixtures: complements hold, prior RAE = 100".into())
}

fn classifier_validity() -> Result<String> {
    let d = imbalanced_fixture(8);
    for kind in ClassifierKind::ALL {
        let mut model = build_classifier(kind, 9);
        model.fit(&d)?;
        for inst in &d.instances {
            let dist = model.predict_distribution(inst)?;
            let sum: f64 = dist.iter().sum();
            if (sum - 1.0).abs() > 1e-9 || dist.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(fail(format!("{} emitted an invalid distribution {dist:?}", kind.id())));
            }
        }
    }
    Ok("all five classifiers emit unit-sum distributions".into())
}

fn pipeline_determinism() -> Result<String> {
    let d = imbalanced_fixture(10);
    let mut cfg = PipelineConfig::default().with_method(Method::Hybrid);
    cfg.run.outer_folds = 4;
    cfg.run.wrapper_folds = 2;
    cfg.ga.population_size = 4;
    cfg.ga.max_generations = 2;
    let a = serde_json::to_string(&run_method_on(&d, &cfg)?)
        .map_err(|e| fail(e.to_string()))?;
    let b = serde_json::to_string(&run_method_on(&d, &cfg)?)
        .map_err(|e| fail(e.to_string()))?;
    if a != b {
        return Err(fail("two hybrid runs serialized differently".into()));
    }
    Ok("hybrid run repeated byte-identically".into())
}
