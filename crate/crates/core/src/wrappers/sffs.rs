//! Sequential floating forward selection.
//!
//! Forward: add the single feature that maximises fitness; stop when the new
//! subset does not strictly beat the best subset already seen at that size,
//! or when every feature is in. Backward (floating): while dropping one
//! feature strictly beats the best subset known at the smaller size, drop it.
//! The answer is the best subset recorded at any size; fitness ties prefer
//! the smaller subset.

use serde::{Deserialize, Serialize};

use super::{mean, FitnessEvaluator, HistoryEntry, WrapperConfig, WrapperResult, DEFAULT_FITNESS_FOLDS};
use crate::classifiers::ClassifierKind;
use crate::dataset::{Dataset, FeatureMask};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SffsConfig {
    pub fitness_folds: usize,
    pub max_subset_evaluations: usize,
    pub seed: u64,
}

impl Default for SffsConfig {
    fn default() -> Self {
        Self {
            fitness_folds: DEFAULT_FITNESS_FOLDS,
            max_subset_evaluations: 10_000,
            seed: 0,
        }
    }
}

impl SffsConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.fitness_folds < 2 {
            out.push(format!("sffs.fitness_folds must be >= 2 (got {})", self.fitness_folds));
        }
        if self.max_subset_evaluations < 1 {
            out.push("max_subset_evaluations must be >= 1".to_string());
        }
        out
    }
}

/// Best candidate of a batch (first on ties).
fn pick(candidates: &[FeatureMask], scores: &[f64]) -> Option<(FeatureMask, f64)> {
    let mut best: Option<usize> = None;
    for i in 0..scores.len() {
        if best.is_none_or(|b| scores[i] > scores[b]) {
            best = Some(i);
        }
    }
    best.map(|i| (candidates[i].clone(), scores[i]))
}

pub fn sffs_select(train: &Dataset, kind: &ClassifierKind, cfg: &SffsConfig) -> Result<WrapperResult> {
    let problems = cfg.violations();
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    let n = train.n_features();
    let mut evaluator = FitnessEvaluator::new(train, kind, cfg.fitness_folds, cfg.seed)?;
    // best_by_size[k]: best subset of k features seen so far
    let mut best_by_size: Vec<Option<(FeatureMask, f64)>> = vec![None; n + 1];
    let mut current = FeatureMask::zeros(n);
    let mut history = Vec::new();
    let mut truncated = false;

    let best_so_far = |table: &[Option<(FeatureMask, f64)>]| -> f64 {
        table
            .iter()
            .flatten()
            .map(|(_, f)| *f)
            .fold(f64::NEG_INFINITY, f64::max)
    };

    'search: while current.count_ones() < n {
        let additions: Vec<FeatureMask> = (0..n)
            .filter(|&i| !current.get(i))
            .map(|i| {
                let mut m = current.clone();
                m.set(i, true);
                m
            })
            .collect();
        if evaluator.evaluations() + additions.len() > cfg.max_subset_evaluations {
            truncated = true;
            break;
        }
        let scores = evaluator
            .evaluate_batch(&additions)
            .map_err(|e| e.context(format!("sffs forward from {current}")))?;
        let (added, fitness) = pick(&additions, &scores).expect("at least one addition");
        let size = added.count_ones();
        if best_by_size[size].as_ref().is_some_and(|(_, b)| fitness <= *b) {
            break;
        }
        best_by_size[size] = Some((added.clone(), fitness));
        let gained = added.selected().into_iter().find(|&i| !current.get(i));
        history.push(HistoryEntry {
            best_fitness: best_so_far(&best_by_size),
            mean_fitness: mean(&scores),
            note: format!("+{}", gained.map_or(String::new(), |i| i.to_string())),
        });
        current = added;

        while current.count_ones() > 1 {
            let removals: Vec<FeatureMask> = current
                .selected()
                .into_iter()
                .map(|i| {
                    let mut m = current.clone();
                    m.set(i, false);
                    m
                })
                .collect();
            if evaluator.evaluations() + removals.len() > cfg.max_subset_evaluations {
                truncated = true;
                break 'search;
            }
            let scores = evaluator
                .evaluate_batch(&removals)
                .map_err(|e| e.context(format!("sffs backward from {current}")))?;
            let (reduced, fitness) = pick(&removals, &scores).expect("at least one removal");
            let size = reduced.count_ones();
            if best_by_size[size].as_ref().is_some_and(|(_, b)| fitness <= *b) {
                break;
            }
            let dropped = current.selected().into_iter().find(|&i| !reduced.get(i));
            best_by_size[size] = Some((reduced.clone(), fitness));
            history.push(HistoryEntry {
                best_fitness: best_so_far(&best_by_size),
                mean_fitness: mean(&scores),
                note: format!("-{}", dropped.map_or(String::new(), |i| i.to_string())),
            });
            current = reduced;
        }
    }

    let mut best: Option<(FeatureMask, f64)> = None;
    for (mask, fitness) in best_by_size.into_iter().flatten() {
        if best.as_ref().is_none_or(|(_, b)| fitness > *b) {
            best = Some((mask, fitness));
        }
    }
    let (best_mask, best_fitness) = best.ok_or_else(|| {
        Error::Config(vec!["max_subset_evaluations leaves no room for a single step".into()])
    })?;
    Ok(WrapperResult::build(
        &evaluator,
        best_mask,
        best_fitness,
        history,
        truncated,
        WrapperConfig::Sffs(cfg.clone()),
    ))
}
