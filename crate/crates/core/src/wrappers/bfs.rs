//! Best-first search over the subset lattice.
//!
//! Starts from the empty set (expanded into all singletons), keeps an open
//! list ordered by fitness and expands the most promising node into every
//! unvisited single-bit addition or removal. Stops when the open list is
//! empty, after `max_expansions_without_improvement` consecutive expansions
//! that do not raise the global best, or when the evaluation cap is hit.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{mean, FitnessEvaluator, HistoryEntry, SearchBudget, WrapperConfig, WrapperResult};
use crate::classifiers::ClassifierKind;
use crate::dataset::{Dataset, FeatureMask};
use crate::error::{Error, Result};

struct OpenNode {
    fitness: f64,
    mask: FeatureMask,
}

impl PartialEq for OpenNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenNode {}

impl PartialOrd for OpenNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Max-heap order: higher fitness, then fewer features, then the
/// lexicographically smaller bit string.
impl Ord for OpenNode {
    fn cmp(&self, other: &Self) -> Ordering {
        self.fitness
            .total_cmp(&other.fitness)
            .then_with(|| other.mask.count_ones().cmp(&self.mask.count_ones()))
            .then_with(|| other.mask.cmp(&self.mask))
    }
}

fn neighbours(mask: &FeatureMask) -> Vec<FeatureMask> {
    (0..mask.len())
        .map(|i| {
            let mut m = mask.clone();
            m.flip(i);
            m
        })
        .filter(|m| !m.none_selected())
        .collect()
}

pub fn bfs_select(
    train: &Dataset,
    kind: &ClassifierKind,
    budget: &SearchBudget,
    fitness_folds: usize,
    seed: u64,
) -> Result<WrapperResult> {
    let problems = budget.violations();
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    let mut evaluator = FitnessEvaluator::new(train, kind, fitness_folds, seed)?;
    let mut open = BinaryHeap::new();
    let mut history = Vec::new();
    let mut best: Option<(FeatureMask, f64)> = None;
    let mut stale = 0;
    let mut truncated = false;
    let mut frontier = neighbours(&FeatureMask::zeros(train.n_features()));
    let mut expanding = String::from("empty set");

    loop {
        let room = budget
            .max_subset_evaluations
            .saturating_sub(evaluator.evaluations());
        if frontier.len() > room {
            frontier.truncate(room);
            truncated = true;
        }
        let scores = evaluator
            .evaluate_batch(&frontier)
            .map_err(|e| e.context(format!("bfs expanding {expanding}")))?;
        let mut improved = false;
        for (mask, &fitness) in frontier.iter().zip(&scores) {
            if best.as_ref().is_none_or(|(_, b)| fitness > *b) {
                best = Some((mask.clone(), fitness));
                improved = true;
            }
        }
        stale = if improved { 0 } else { stale + 1 };
        let best_fitness = best.as_ref().map_or(0.0, |b| b.1);
        history.push(HistoryEntry {
            best_fitness,
            mean_fitness: if scores.is_empty() { best_fitness } else { mean(&scores) },
            note: format!("expand {expanding}: {} children", frontier.len()),
        });
        for (mask, fitness) in frontier.into_iter().zip(scores) {
            open.push(OpenNode { fitness, mask });
        }
        if truncated || stale >= budget.max_expansions_without_improvement {
            break;
        }
        let Some(node) = open.pop() else { break };
        expanding = node.mask.to_string();
        frontier = neighbours(&node.mask)
            .into_iter()
            .filter(|m| !evaluator.contains(m))
            .collect();
    }

    let (best_mask, best_fitness) = best.ok_or_else(|| {
        Error::Config(vec!["max_subset_evaluations leaves no room for a single mask".into()])
    })?;
    Ok(WrapperResult::build(
        &evaluator,
        best_mask,
        best_fitness,
        history,
        truncated,
        WrapperConfig::Bfs {
            budget: budget.clone(),
            fitness_folds,
            seed,
        },
    ))
}
