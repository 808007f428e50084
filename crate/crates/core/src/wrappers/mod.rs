//! Subset search strategies that score feature masks by the cross-validated
//! accuracy of a wrapped classifier.

mod bfs;
mod ga;
mod sffs;

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{fit, ClassifierKind, Predictor};
use crate::dataset::{project, stratified_folds, Dataset, FeatureMask, FoldAssignment};
use crate::error::{Error, Result};
use crate::evaluation::{accuracy, confusion};
use crate::rng::{derive_seed, stream, ChaCha8Rng};

pub use bfs::bfs_select;
pub use ga::{ga_select, ga_select_from, GaConfig};
pub use sffs::{sffs_select, SffsConfig};

pub const DEFAULT_FITNESS_FOLDS: usize = 5;

/// Scores masks by internal stratified cross-validation and memoises the
/// result, so each distinct mask is trained at most `folds` times per run.
///
/// The internal folds are drawn once per evaluator, so every mask is scored on
/// the same partition.
pub struct FitnessEvaluator<'a> {
    train: &'a Dataset,
    kind: &'a ClassifierKind,
    folds: FoldAssignment,
    seed: u64,
    cache: HashMap<FeatureMask, f64>,
    order: Vec<FeatureMask>,
    fits: usize,
}

impl<'a> FitnessEvaluator<'a> {
    pub fn new(train: &'a Dataset, kind: &'a ClassifierKind, folds: usize, seed: u64) -> Result<Self> {
        kind.validate()?;
        if train.has_missing() {
            return Err(Error::MissingValues);
        }
        let assignment = stratified_folds(train, folds, derive_seed(seed, &[stream::FITNESS_FOLDS]))?;
        Ok(Self {
            train,
            kind,
            folds: assignment,
            seed,
            cache: HashMap::new(),
            order: Vec::new(),
            fits: 0,
        })
    }

    pub fn n_features(&self) -> usize {
        self.train.n_features()
    }

    pub fn contains(&self, mask: &FeatureMask) -> bool {
        self.cache.contains_key(mask)
    }

    pub fn cached(&self, mask: &FeatureMask) -> Option<f64> {
        self.cache.get(mask).copied()
    }

    /// Distinct masks scored so far.
    pub fn evaluations(&self) -> usize {
        self.order.len()
    }

    /// Masks in first-evaluation order.
    pub fn visited(&self) -> &[FeatureMask] {
        &self.order
    }

    /// Classifier fits performed so far.
    pub fn fits(&self) -> usize {
        self.fits
    }

    pub fn evaluate(&mut self, mask: &FeatureMask) -> Result<f64> {
        Ok(self.evaluate_batch(std::slice::from_ref(mask))?[0])
    }

    /// Score several masks. Uncached masks are trained in parallel; results
    /// are merged in input order, so the outcome does not depend on scheduling.
    pub fn evaluate_batch(&mut self, masks: &[FeatureMask]) -> Result<Vec<f64>> {
        let mut fresh: Vec<&FeatureMask> = Vec::new();
        for m in masks {
            if !self.cache.contains_key(m) && !fresh.contains(&m) {
                fresh.push(m);
            }
        }
        let (train, kind, folds, seed) = (self.train, self.kind, &self.folds, self.seed);
        let scored: Vec<Result<f64>> = fresh
            .par_iter()
            .map(|m| cv_accuracy(train, kind, folds, seed, m))
            .collect();
        for (m, score) in fresh.into_iter().zip(scored) {
            let score = score.map_err(|e| e.context(format!("fitness of mask {m}")))?;
            self.fits += self.folds.k();
            self.cache.insert(m.clone(), score);
            self.order.push(m.clone());
        }
        Ok(masks.iter().map(|m| self.cache[m]).collect())
    }
}

fn cv_accuracy(
    train: &Dataset,
    kind: &ClassifierKind,
    folds: &FoldAssignment,
    seed: u64,
    mask: &FeatureMask,
) -> Result<f64> {
    let projected = project(train, mask)?;
    let mut total = 0.0;
    for fold in 0..folds.k() {
        let fit_part = projected.subset(&folds.train_indices(fold));
        let held_out = projected.subset(&folds.test_indices(fold));
        let model = fit(kind, &fit_part, derive_seed(seed, &[stream::FIT, fold as u64]))?;
        let predicted = model.predict_all(&held_out)?;
        total += accuracy(&confusion(&predicted, &held_out.labels())?)?;
    }
    Ok(total / folds.k() as f64)
}

/// Mean accuracy of `kind` over an internal stratified `folds`-fold split of
/// `project(train, mask)`.
pub fn fitness(
    mask: &FeatureMask,
    train: &Dataset,
    kind: &ClassifierKind,
    folds: usize,
    seed: u64,
) -> Result<f64> {
    FitnessEvaluator::new(train, kind, folds, seed)?.evaluate(mask)
}

/// Exchange the segment `[cut1, cut2)` between two parents.
pub fn two_point_crossover(
    a: &FeatureMask,
    b: &FeatureMask,
    cut1: usize,
    cut2: usize,
) -> (FeatureMask, FeatureMask) {
    assert_eq!(a.len(), b.len());
    assert!(cut1 < cut2 && cut2 <= a.len(), "invalid cuts ({cut1}, {cut2})");
    let mut c1 = a.clone();
    let mut c2 = b.clone();
    for i in cut1..cut2 {
        c1.set(i, b.get(i));
        c2.set(i, a.get(i));
    }
    (c1, c2)
}

/// Flip each bit with probability `per_gene_prob`; an all-zero result gets
/// one uniformly chosen bit set.
pub fn mutate(m: &FeatureMask, per_gene_prob: f64, rng: &mut ChaCha8Rng) -> FeatureMask {
    let mut out = m.clone();
    for i in 0..out.len() {
        if rng.random::<f64>() < per_gene_prob {
            out.flip(i);
        }
    }
    repair(&mut out, rng);
    out
}

pub(crate) fn repair(m: &mut FeatureMask, rng: &mut ChaCha8Rng) {
    if m.none_selected() && !m.is_empty() {
        let i = rng.random_range(0..m.len());
        m.set(i, true);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Best-first search stops after this many consecutive expansions
    /// without a new global best.
    pub max_expansions_without_improvement: usize,
    /// Hard cap on distinct masks scored.
    pub max_subset_evaluations: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            max_expansions_without_improvement: 5,
            max_subset_evaluations: 10_000,
        }
    }
}

impl SearchBudget {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.max_expansions_without_improvement < 1 {
            out.push("bfs.max_expansions_without_improvement must be >= 1".to_string());
        }
        if self.max_subset_evaluations < 1 {
            out.push("max_subset_evaluations must be >= 1".to_string());
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    /// Best fitness seen so far.
    pub best_fitness: f64,
    /// Mean fitness of the population (GA) or of the candidates scored in
    /// this step (BFS, SFFS).
    pub mean_fitness: f64,
    pub note: String,
}

/// Search settings echoed into every result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "wrapper", rename_all = "snake_case")]
pub enum WrapperConfig {
    Ga(GaConfig),
    Bfs {
        budget: SearchBudget,
        fitness_folds: usize,
        seed: u64,
    },
    Sffs(SffsConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WrapperResult {
    pub best_mask: FeatureMask,
    pub selected_features: Vec<String>,
    pub best_fitness: f64,
    pub history: Vec<HistoryEntry>,
    /// Distinct masks scored.
    pub evaluations: usize,
    /// Classifier fits spent on scoring.
    pub fits: usize,
    /// Set when the evaluation cap cut the search short.
    pub truncated: bool,
    pub classifier: ClassifierKind,
    pub config: WrapperConfig,
    #[serde(skip)]
    pub visited: Vec<FeatureMask>,
}

impl WrapperResult {
    pub(crate) fn build(
        evaluator: &FitnessEvaluator<'_>,
        best_mask: FeatureMask,
        best_fitness: f64,
        history: Vec<HistoryEntry>,
        truncated: bool,
        config: WrapperConfig,
    ) -> Self {
        let selected_features = best_mask
            .selected_names(evaluator.train.schema())
            .into_iter()
            .map(String::from)
            .collect();
        Self {
            best_mask,
            selected_features,
            best_fitness,
            history,
            evaluations: evaluator.evaluations(),
            fits: evaluator.fits(),
            truncated,
            classifier: evaluator.kind.clone(),
            config,
            visited: evaluator.visited().to_vec(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}
