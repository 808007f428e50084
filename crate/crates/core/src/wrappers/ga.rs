//! Generational GA over feature masks with elitist replacement.
//!
//! Per generation: roulette-select parent pairs from the incumbents, cross
//! each pair with probability `crossover_prob` (two cut points), mutate every
//! child bit-wise, score the children, then let the best children displace the
//! worst incumbents whenever they are strictly fitter. The population size
//! never changes and the best-ever mask is returned.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{mean, mutate, repair, two_point_crossover, FitnessEvaluator, HistoryEntry, WrapperConfig, WrapperResult, DEFAULT_FITNESS_FOLDS};
use crate::classifiers::ClassifierKind;
use crate::dataset::{Dataset, FeatureMask};
use crate::error::{Error, Result};
use crate::rng::{derived_rng, stream, ChaCha8Rng};

/// Floor on roulette weights so zero-fitness members stay selectable.
pub const MIN_SELECTION_WEIGHT: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    /// Per-gene flip probability.
    pub mutation_prob: f64,
    pub seed: u64,
    pub fitness_folds: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 20,
            generations: 40,
            crossover_prob: 0.2,
            mutation_prob: 0.09,
            seed: 0,
            fitness_folds: DEFAULT_FITNESS_FOLDS,
        }
    }
}

impl GaConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.population_size < 2 || !self.population_size.is_multiple_of(2) {
            out.push(format!(
                "ga.population_size must be even and >= 2 (got {})",
                self.population_size
            ));
        }
        if self.generations < 1 {
            out.push(format!("ga.generations must be >= 1 (got {})", self.generations));
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            out.push(format!("ga.crossover_prob must be in [0, 1] (got {})", self.crossover_prob));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            out.push(format!("ga.mutation_prob must be in [0, 1] (got {})", self.mutation_prob));
        }
        if self.fitness_folds < 2 {
            out.push(format!("ga.fitness_folds must be >= 2 (got {})", self.fitness_folds));
        }
        out
    }
}

fn roulette(weights: &[f64], total: f64, rng: &mut ChaCha8Rng) -> usize {
    let mut target = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if target < *w {
            return i;
        }
        target -= w;
    }
    weights.len() - 1
}

/// Run the GA from a random initial population.
pub fn ga_select(train: &Dataset, kind: &ClassifierKind, cfg: &GaConfig) -> Result<WrapperResult> {
    ga_select_from(train, kind, cfg, None)
}

/// Run the GA, optionally seeding the first population. A supplied population
/// must have `cfg.population_size` masks of the right length; all-zero masks
/// in it are repaired.
pub fn ga_select_from(
    train: &Dataset,
    kind: &ClassifierKind,
    cfg: &GaConfig,
    initial: Option<Vec<FeatureMask>>,
) -> Result<WrapperResult> {
    let mut problems = cfg.violations();
    problems.extend(kind.violations());
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    let n = train.n_features();
    let mut rng = derived_rng(cfg.seed, &[stream::GA]);
    let mut population = match initial {
        Some(p) => {
            if p.len() != cfg.population_size || p.iter().any(|m| m.len() != n) {
                return Err(Error::Config(vec![format!(
                    "initial population must hold {} masks of length {n}",
                    cfg.population_size
                )]));
            }
            p
        }
        None => (0..cfg.population_size)
            .map(|_| FeatureMask::from_bits((0..n).map(|_| rng.random::<bool>()).collect()))
            .collect(),
    };
    for m in &mut population {
        repair(m, &mut rng);
    }

    let mut evaluator = FitnessEvaluator::new(train, kind, cfg.fitness_folds, cfg.seed)?;
    let mut scores = evaluator
        .evaluate_batch(&population)
        .map_err(|e| e.context("ga initial population"))?;
    let (mut best_mask, mut best_fitness) = fittest(&population, &scores);
    let mut history = Vec::with_capacity(cfg.generations);

    for generation in 0..cfg.generations {
        let weights: Vec<f64> = scores.iter().map(|s| s.max(MIN_SELECTION_WEIGHT)).collect();
        let total: f64 = weights.iter().sum();
        let mut offspring = Vec::with_capacity(cfg.population_size);
        while offspring.len() < cfg.population_size {
            let a = &population[roulette(&weights, total, &mut rng)];
            let b = &population[roulette(&weights, total, &mut rng)];
            let (c1, c2) = if rng.random::<f64>() < cfg.crossover_prob {
                let cut1 = rng.random_range(0..n);
                let cut2 = rng.random_range(cut1 + 1..=n);
                two_point_crossover(a, b, cut1, cut2)
            } else {
                (a.clone(), b.clone())
            };
            offspring.push(mutate(&c1, cfg.mutation_prob, &mut rng));
            offspring.push(mutate(&c2, cfg.mutation_prob, &mut rng));
        }
        let offspring_scores = evaluator
            .evaluate_batch(&offspring)
            .map_err(|e| e.context(format!("ga generation {}", generation + 1)))?;

        // worst incumbents first, best offspring first; stable on ties
        let mut worst: Vec<usize> = (0..population.len()).collect();
        worst.sort_by(|&i, &j| scores[i].total_cmp(&scores[j]));
        let mut fittest_children: Vec<usize> = (0..offspring.len()).collect();
        fittest_children.sort_by(|&i, &j| offspring_scores[j].total_cmp(&offspring_scores[i]));
        let mut replaced = 0;
        for (&slot, &child) in worst.iter().zip(&fittest_children) {
            if offspring_scores[child] > scores[slot] {
                population[slot] = offspring[child].clone();
                scores[slot] = offspring_scores[child];
                replaced += 1;
            } else {
                break;
            }
        }

        debug_assert_eq!(population.len(), cfg.population_size);
        let (gen_mask, gen_fitness) = fittest(&population, &scores);
        if gen_fitness > best_fitness {
            best_mask = gen_mask;
            best_fitness = gen_fitness;
        }
        history.push(HistoryEntry {
            best_fitness,
            mean_fitness: mean(&scores),
            note: format!("generation {}: {replaced} replaced", generation + 1),
        });
    }

    Ok(WrapperResult::build(
        &evaluator,
        best_mask,
        best_fitness,
        history,
        false,
        WrapperConfig::Ga(cfg.clone()),
    ))
}

/// First member with the highest score.
fn fittest(population: &[FeatureMask], scores: &[f64]) -> (FeatureMask, f64) {
    let mut best = 0;
    for i in 1..scores.len() {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    (population[best].clone(), scores[best])
}
