//! Genetic-algorithm wrapper search over feature bitmasks, scored by the
//! cross-validated accuracy of Naive Bayes on the masked dataset.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{cross_validate, predicted_label, ClassifierKind};
use crate::data::{Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::seed::{mask_seed, rng_for};

/// A feature subset over the candidate list: `mask[i]` toggles
/// `candidates[i]`. The fitness cache is cleared by any operator that
/// changes the mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub mask: Vec<bool>,
    pub fitness: Option<f64>,
}

impl Chromosome {
    pub fn new(mask: Vec<bool>) -> Self {
        Chromosome { mask, fitness: None }
    }

    pub fn ones(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaParams {
    pub crossover_probability: f64,
    pub max_generations: usize,
    pub mutation_probability: f64,
    pub population_size: usize,
    pub elitism: usize,
    pub seed: u64,
}

impl GaParams {
    /// The benchmark defaults: crossover 0.6, 20 generations, mutation
    /// 0.033, population 20, one elite.
    pub fn defaults(seed: u64) -> Self {
        GaParams {
            crossover_probability: 0.6,
            max_generations: 20,
            mutation_probability: 0.033,
            population_size: 20,
            elitism: 1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("crossover_probability", self.crossover_probability),
            ("mutation_probability", self.mutation_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if self.population_size < 2 {
            return Err(Error::config(format!(
                "population_size must be at least 2, got {}",
                self.population_size
            )));
        }
        if self.elitism >= self.population_size {
            return Err(Error::config(format!(
                "elitism ({}) must be smaller than the population ({})",
                self.elitism, self.population_size
            )));
        }
        Ok(())
    }
}

/// Per-generation progress. `best_fitness` and `best_mask_size` describe
/// the best chromosome seen so far (not just the current population), so
/// the column is non-decreasing by construction; `mean_fitness` is the
/// current population's mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_mask_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOutcome {
    /// chosen attribute indices, ascending
    pub selected: Vec<usize>,
    pub best_fitness: f64,
    pub trace: Vec<GenerationStats>,
    /// distinct masks scored; bounded by population · (generations + 1)
    pub evaluations: usize,
}

/// The ranked-ladder initial population: individual `i` activates the top
/// `⌈(i+1)·n / population_size⌉` candidates (which arrive in rank order),
/// then each remaining bit is switched on with the mutation probability.
pub fn seed_population(candidates: &[usize], params: &GaParams) -> Vec<Chromosome> {
    let n = candidates.len();
    (0..params.population_size)
        .map(|i| {
            let prefix = ((i + 1) * n).div_ceil(params.population_size).max(1);
            let mut rng = rng_for(params.seed, "seed-population", i as u64);
            let mask: Vec<bool> = (0..n)
                .map(|bit| bit < prefix || rng.gen_bool(params.mutation_probability))
                .collect();
            Chromosome::new(mask)
        })
        .collect()
}

/// Pooled cross-validated Naive Bayes accuracy of the masked feature set;
/// an empty mask scores 0 so it can never win.
pub fn fitness(
    mask: &[bool],
    candidates: &[usize],
    d: &Dataset,
    folds: &FoldPlan,
    seed: u64,
) -> Result<f64> {
    debug_assert_eq!(mask.len(), candidates.len());
    let features: Vec<usize> = mask
        .iter()
        .zip(candidates)
        .filter(|(&on, _)| on)
        .map(|(_, &f)| f)
        .collect();
    if features.is_empty() {
        return Ok(0.0);
    }
    let projected = d.project(&features)?;
    let dists = cross_validate(ClassifierKind::NaiveBayes, &projected, folds, mask_seed(seed, mask))?;
    let correct = dists
        .iter()
        .zip(&projected.instances)
        .filter(|(dist, inst)| predicted_label(dist) == inst.label)
        .count();
    Ok(correct as f64 / projected.n_instances() as f64)
}

/// Fitness-proportionate draw; a zero-sum population degrades to a uniform
/// draw. Returns the chosen index.
pub fn roulette_select(population: &[Chromosome], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = population.iter().map(|c| c.fitness.unwrap_or(0.0)).sum();
    if total <= 0.0 {
        return rng.gen_range(0..population.len());
    }
    let mut ticket = rng.gen::<f64>() * total;
    for (i, c) in population.iter().enumerate() {
        ticket -= c.fitness.unwrap_or(0.0);
        if ticket < 0.0 {
            return i;
        }
    }
    population.len() - 1
}

/// Single-point crossover with probability `p`; otherwise the children are
/// plain copies. Fresh children never carry a fitness cache.
pub fn crossover(
    a: &Chromosome,
    b: &Chromosome,
    rng: &mut ChaCha8Rng,
    p: f64,
) -> Result<(Chromosome, Chromosome)> {
    if a.mask.len() != b.mask.len() {
        return Err(Error::internal(format!(
            "crossover on unequal mask lengths {} and {}",
            a.mask.len(),
            b.mask.len()
        )));
    }
    let n = a.mask.len();
    if n >= 2 && rng.gen_bool(p) {
        let cut = rng.gen_range(1..n);
        let mut c1 = a.mask[..cut].to_vec();
        c1.extend_from_slice(&b.mask[cut..]);
        let mut c2 = b.mask[..cut].to_vec();
        c2.extend_from_slice(&a.mask[cut..]);
        Ok((Chromosome::new(c1), Chromosome::new(c2)))
    } else {
        Ok((Chromosome::new(a.mask.clone()), Chromosome::new(b.mask.clone())))
    }
}

/// Independent bit flips with probability `p`; the fitness cache survives
/// only if nothing flipped.
pub fn mutate(c: &Chromosome, rng: &mut ChaCha8Rng, p: f64) -> Chromosome {
    let mut changed = false;
    let mask: Vec<bool> = c
        .mask
        .iter()
        .map(|&bit| {
            if rng.gen_bool(p) {
                changed = true;
                !bit
            } else {
                bit
            }
        })
        .collect();
    Chromosome { mask, fitness: if changed { None } else { c.fitness } }
}

/// Index ordering used for elitism and the best-ever record: higher
/// fitness first, then fewer active features, then earlier position.
fn rank_indices(population: &[Chromosome]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&x, &y| {
        let fx = population[x].fitness.unwrap_or(0.0);
        let fy = population[y].fitness.unwrap_or(0.0);
        fy.total_cmp(&fx)
            .then(population[x].ones().cmp(&population[y].ones()))
            .then(x.cmp(&y))
    });
    order
}

struct BestEver {
    mask: Vec<bool>,
    fitness: f64,
    ones: usize,
}

impl BestEver {
    fn offer(&mut self, c: &Chromosome) {
        let f = c.fitness.unwrap_or(0.0);
        let ones = c.ones();
        if f > self.fitness || (f == self.fitness && ones < self.ones) {
            self.mask = c.mask.clone();
            self.fitness = f;
            self.ones = ones;
        }
    }
}

fn evaluate_population(
    population: &mut [Chromosome],
    candidates: &[usize],
    d: &Dataset,
    folds: &FoldPlan,
    seed: u64,
    cache: &mut HashMap<Vec<bool>, f64>,
    evaluations: &mut usize,
) -> Result<()> {
    let mut misses: Vec<Vec<bool>> = Vec::new();
    for c in population.iter() {
        if c.fitness.is_none() && !cache.contains_key(&c.mask) && !misses.contains(&c.mask) {
            misses.push(c.mask.clone());
        }
    }
    let scored: Vec<(Vec<bool>, f64)> = misses
        .into_par_iter()
        .map(|mask| fitness(&mask, candidates, d, folds, seed).map(|f| (mask, f)))
        .collect::<Result<_>>()?;
    for (mask, f) in scored {
        cache.insert(mask, f);
        *evaluations += 1;
    }
    for c in population.iter_mut() {
        if c.fitness.is_none() {
            c.fitness = Some(cache[&c.mask]);
        }
    }
    Ok(())
}

/// Runs the full generational loop and returns the best feature subset
/// ever evaluated. Fitness evaluations parallelize within a generation;
/// everything else consumes one sequential seeded stream, so results do
/// not depend on the worker count.
pub fn evolve(
    candidates: &[usize],
    d: &Dataset,
    folds: &FoldPlan,
    params: &GaParams,
) -> Result<EvolveOutcome> {
    params.validate()?;
    if candidates.is_empty() {
        return Err(Error::config("wrapper search needs at least one candidate feature"));
    }
    let mut cache: HashMap<Vec<bool>, f64> = HashMap::new();
    let mut evaluations = 0usize;
    let mut population = seed_population(candidates, params);
    evaluate_population(&mut population, candidates, d, folds, params.seed, &mut cache, &mut evaluations)?;

    let mut best = BestEver { mask: vec![false; candidates.len()], fitness: f64::NEG_INFINITY, ones: usize::MAX };
    let mut trace = Vec::with_capacity(params.max_generations + 1);
    let record = |population: &[Chromosome], best: &mut BestEver, generation: usize, trace: &mut Vec<GenerationStats>| {
        for c in population {
            best.offer(c);
        }
        let mean = population.iter().map(|c| c.fitness.unwrap_or(0.0)).sum::<f64>()
            / population.len() as f64;
        trace.push(GenerationStats {
            generation,
            best_fitness: best.fitness,
            mean_fitness: mean,
            best_mask_size: best.ones,
        });
    };
    record(&population, &mut best, 0, &mut trace);

    let mut rng = rng_for(params.seed, "ga-ops", 0);
    for generation in 1..=params.max_generations {
        let mut next: Vec<Chromosome> = Vec::with_capacity(params.population_size);
        for &i in rank_indices(&population).iter().take(params.elitism) {
            next.push(population[i].clone());
        }
        while next.len() < params.population_size {
            let p1 = roulette_select(&population, &mut rng);
            let p2 = roulette_select(&population, &mut rng);
            let (c1, c2) = crossover(&population[p1], &population[p2], &mut rng, params.crossover_probability)?;
            next.push(mutate(&c1, &mut rng, params.mutation_probability));
            if next.len() < params.population_size {
                next.push(mutate(&c2, &mut rng, params.mutation_probability));
            }
        }
        population = next;
        evaluate_population(&mut population, candidates, d, folds, params.seed, &mut cache, &mut evaluations)?;
        record(&population, &mut best, generation, &mut trace);
    }

    let mut selected: Vec<usize> = best
        .mask
        .iter()
        .zip(candidates)
        .filter(|(&on, _)| on)
        .map(|(_, &f)| f)
        .collect();
    selected.sort_unstable();
    Ok(EvolveOutcome { selected, best_fitness: best.fitness, trace, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{stratified_folds, AttributeSpec, Cell, Instance};

    fn nominal_dataset(rows: &[(Vec<usize>, usize)], arities: &[usize]) -> Dataset {
        let schema = arities
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                AttributeSpec::nominal(format!("f{i}"), (0..a).map(|v| format!("v{v}")).collect())
            })
            .collect();
        let instances = rows
            .iter()
            .map(|(vals, label)| {
                Instance::original(vals.iter().map(|&v| Cell::Nominal(v)).collect(), *label)
            })
            .collect();
        Dataset::new("t", schema, "class", vec!["n".into(), "y".into()], instances).unwrap()
    }

    #[test]
    fn ladder_without_noise_builds_prefixes() {
        let mut params = GaParams::defaults(0);
        params.population_size = 4;
        params.mutation_probability = 0.0;
        let pop = seed_population(&[7, 3, 5, 1], &params);
        let sizes: Vec<usize> = pop.iter().map(Chromosome::ones).collect();
        assert_eq!(sizes, vec![1, 2, 3, 4]);
        assert!(pop[3].mask.iter().all(|&b| b), "last rung is the full mask");
        assert_eq!(pop[0].mask, vec![true, false, false, false]);
    }

    #[test]
    fn seeding_is_deterministic() {
        let params = GaParams::defaults(99);
        let candidates: Vec<usize> = (0..10).collect();
        assert_eq!(seed_population(&candidates, &params), seed_population(&candidates, &params));
    }

    #[test]
    fn perfect_feature_scores_one() {
        let rows: Vec<(Vec<usize>, usize)> = (0..10)
            .map(|i| {
                let label = i % 2;
                (vec![label, i % 3], label)
            })
            .collect();
        let d = nominal_dataset(&rows, &[2, 3]);
        let folds = stratified_folds(&d, 5, 0).unwrap();
        let f = fitness(&[true, false], &[0, 1], &d, &folds, 0).unwrap();
        assert_eq!(f, 1.0);
        assert_eq!(fitness(&[false, false], &[0, 1], &d, &folds, 0).unwrap(), 0.0);
    }

    #[test]
    fn noise_feature_scores_near_chance() {
        use rand::Rng;
        let mut accs = Vec::new();
        for seed in 0..20u64 {
            let mut rng = crate::seed::rng_for(seed, "noise-fixture", 0);
            let rows: Vec<(Vec<usize>, usize)> =
                (0..200).map(|i| (vec![rng.gen_range(0..4)], i % 2)).collect();
            let d = nominal_dataset(&rows, &[4]);
            let folds = stratified_folds(&d, 5, seed).unwrap();
            accs.push(fitness(&[true], &[0], &d, &folds, seed).unwrap());
        }
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        assert!((0.45..=0.55).contains(&mean), "mean accuracy {mean}");
    }

    #[test]
    fn roulette_follows_fitness_mass() {
        let pop = vec![
            Chromosome { mask: vec![true], fitness: Some(0.75) },
            Chromosome { mask: vec![false], fitness: Some(0.25) },
        ];
        let mut rng = rng_for(5, "roulette-test", 0);
        let mut first = 0usize;
        for _ in 0..10_000 {
            if roulette_select(&pop, &mut rng) == 0 {
                first += 1;
            }
        }
        assert!((7350..=7650).contains(&first), "drew first {first} times");

        let winner = vec![
            Chromosome { mask: vec![true], fitness: Some(1.0) },
            Chromosome { mask: vec![false], fitness: Some(0.0) },
            Chromosome { mask: vec![false], fitness: Some(0.0) },
        ];
        for _ in 0..100 {
            assert_eq!(roulette_select(&winner, &mut rng), 0);
        }

        let flat = vec![
            Chromosome { mask: vec![true], fitness: Some(0.0) },
            Chromosome { mask: vec![false], fitness: Some(0.0) },
        ];
        let picks: Vec<usize> = (0..200).map(|_| roulette_select(&flat, &mut rng)).collect();
        assert!(picks.contains(&0) && picks.contains(&1), "zero-sum draw must be uniform");
    }

    #[test]
    fn crossover_splices_or_copies() {
        let a = Chromosome { mask: vec![true, true, true, false, false, false], fitness: Some(0.5) };
        let b = Chromosome { mask: vec![false, false, false, true, true, true], fitness: Some(0.6) };
        let mut rng = rng_for(1, "crossover-test", 0);
        for _ in 0..50 {
            let (c1, c2) = crossover(&a, &b, &mut rng, 1.0).unwrap();
            assert_eq!(c1.fitness, None);
            for i in 0..6 {
                assert_ne!(c1.mask[i], c2.mask[i], "parents differ at every position, so children must too");
            }
            let spliced = (1..6).any(|cut| {
                c1.mask[..cut] == a.mask[..cut]
                    && c1.mask[cut..] == b.mask[cut..]
                    && c2.mask[..cut] == b.mask[..cut]
                    && c2.mask[cut..] == a.mask[cut..]
            });
            assert!(spliced, "children must come from one shared cut: {:?} {:?}", c1.mask, c2.mask);
        }
        let (c1, c2) = crossover(&a, &b, &mut rng, 0.0).unwrap();
        assert_eq!(c1.mask, a.mask);
        assert_eq!(c2.mask, b.mask);
        let short = Chromosome::new(vec![true]);
        assert!(crossover(&a, &short, &mut rng, 1.0).is_err());
    }

    #[test]
    fn mutation_rates_and_cache_rules() {
        let c = Chromosome { mask: vec![true, false, true, false], fitness: Some(0.8) };
        let mut rng = rng_for(2, "mutate-test", 0);
        let same = mutate(&c, &mut rng, 0.0);
        assert_eq!(same.mask, c.mask);
        assert_eq!(same.fitness, Some(0.8), "untouched mask keeps its cache");
        let flipped = mutate(&c, &mut rng, 1.0);
        assert_eq!(flipped.mask, vec![false, true, false, true]);
        assert_eq!(flipped.fitness, None);

        let wide = Chromosome::new(vec![false; 20]);
        let mut flips = 0usize;
        for _ in 0..100_000 {
            flips += mutate(&wide, &mut rng, 0.033).ones();
        }
        let mean = flips as f64 / 100_000.0;
        assert!((0.63..=0.69).contains(&mean), "mean flips {mean}");
    }

    #[test]
    fn single_candidate_is_always_selected() {
        let rows: Vec<(Vec<usize>, usize)> =
            (0..8).map(|i| (vec![i % 2], i % 2)).collect();
        let d = nominal_dataset(&rows, &[2]);
        let folds = stratified_folds(&d, 4, 0).unwrap();
        let mut params = GaParams::defaults(0);
        params.population_size = 4;
        params.max_generations = 3;
        let out = evolve(&[0], &d, &folds, &params).unwrap();
        assert_eq!(out.selected, vec![0]);
        assert_eq!(out.best_fitness, 1.0);
    }

    #[test]
    fn no_variation_keeps_the_population_still() {
        let rows: Vec<(Vec<usize>, usize)> = (0..8).map(|i| (vec![i % 2], i % 2)).collect();
        let d = nominal_dataset(&rows, &[2]);
        let folds = stratified_folds(&d, 4, 0).unwrap();
        let mut params = GaParams::defaults(7);
        params.population_size = 4;
        params.max_generations = 5;
        params.mutation_probability = 0.0;
        params.crossover_probability = 0.0;
        let out = evolve(&[0], &d, &folds, &params).unwrap();
        let means: Vec<f64> = out.trace.iter().map(|t| t.mean_fitness).collect();
        assert!(means.windows(2).all(|w| w[0] == w[1]), "{means:?}");
    }

    fn informative_pair_dataset(seed: u64) -> Dataset {
        use rand::Rng;
        let mut rng = rng_for(seed, "ga-fixture", 0);
        let rows: Vec<(Vec<usize>, usize)> = (0..40)
            .map(|i| {
                let a0 = i % 2;
                let a1 = (i / 2) % 2;
                let label = usize::from(a0 == 1 && a1 == 1);
                let mut vals = vec![a0, a1];
                vals.extend((0..4).map(|_| rng.gen_range(0..2)));
                (vals, label)
            })
            .collect();
        nominal_dataset(&rows, &[2; 6])
    }

    fn exhaustive_best(d: &Dataset, folds: &crate::data::FoldPlan, seed: u64) -> f64 {
        let n = d.n_attributes();
        let candidates: Vec<usize> = (0..n).collect();
        let mut best = 0.0f64;
        for bits in 1u32..(1 << n) {
            let mask: Vec<bool> = (0..n).map(|i| bits & (1 << i) != 0).collect();
            let f = fitness(&mask, &candidates, d, folds, seed).unwrap();
            best = best.max(f);
        }
        best
    }

    #[test]
    fn finds_the_exhaustive_optimum_on_a_small_fixture() {
        let d = informative_pair_dataset(4);
        let folds = stratified_folds(&d, 5, 4).unwrap();
        let candidates: Vec<usize> = (0..6).collect();
        let params = GaParams::defaults(4);
        let out = evolve(&candidates, &d, &folds, &params).unwrap();
        assert_eq!(out.best_fitness, exhaustive_best(&d, &folds, 4));
    }

    #[test]
    fn budget_and_monotonicity_hold() {
        let d = informative_pair_dataset(11);
        let folds = stratified_folds(&d, 5, 11).unwrap();
        let candidates: Vec<usize> = (0..6).collect();
        let params = GaParams::defaults(11);
        let out = evolve(&candidates, &d, &folds, &params).unwrap();
        assert!(out.evaluations <= params.population_size * (params.max_generations + 1));
        assert_eq!(out.trace.len(), params.max_generations + 1);
        let bests: Vec<f64> = out.trace.iter().map(|t| t.best_fitness).collect();
        assert!(bests.windows(2).all(|w| w[1] >= w[0]), "{bests:?}");
    }

    #[test]
    fn evolve_is_reproducible() {
        let d = informative_pair_dataset(3);
        let folds = stratified_folds(&d, 5, 3).unwrap();
        let candidates: Vec<usize> = (0..6).collect();
        let params = GaParams::defaults(3);
        let a = evolve(&candidates, &d, &folds, &params).unwrap();
        let b = evolve(&candidates, &d, &folds, &params).unwrap();
        assert_eq!(a, b);
    }
}
