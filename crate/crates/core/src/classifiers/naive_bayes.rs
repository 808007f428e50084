//! Naive Bayes with Laplace-smoothed categorical tables and Gaussian
//! class-conditional densities for continuous features.
//!
//! Scores are accumulated in the log domain. The evidence term P(B) is the
//! same for both classes, so it is dropped from the argmax and recovered only
//! when normalising posteriors.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{argmax_label, check_trainable, InputSpec, Predictor};
use crate::dataset::{Dataset, FeatureKind, Instance, Label};
use crate::error::{Error, Result};

pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Conditional {
    /// `probs[class][value]`, each row sums to one.
    Categorical { probs: [Vec<f64>; 2] },
    Gaussian { mean: [f64; 2], variance: [f64; 2] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    input: InputSpec,
    /// (negative, positive)
    prior: [f64; 2],
    conditionals: Vec<Conditional>,
}

impl NaiveBayesModel {
    pub fn fit(train: &Dataset) -> Result<Self> {
        check_trainable(train)?;
        let rows = train.dense()?;
        let labels = train.labels();
        let counts = train.class_counts();
        let n = train.len() as f64;
        let prior = [counts[0] as f64 / n, counts[1] as f64 / n];

        let conditionals = train
            .schema()
            .features()
            .iter()
            .enumerate()
            .map(|(f, feature)| match feature.kind {
                FeatureKind::Categorical { arity } => {
                    let arity = arity as usize;
                    let mut tally = [vec![0usize; arity], vec![0usize; arity]];
                    for (row, label) in rows.iter().zip(&labels) {
                        tally[label.index()][row[f] as usize] += 1;
                    }
                    let smooth = |c: usize| -> Vec<f64> {
                        let denom = (counts[c] + arity) as f64;
                        tally[c].iter().map(|&k| (k + 1) as f64 / denom).collect()
                    };
                    Conditional::Categorical {
                        probs: [smooth(0), smooth(1)],
                    }
                }
                FeatureKind::Continuous => {
                    let mut sum = [0.0; 2];
                    for (row, label) in rows.iter().zip(&labels) {
                        sum[label.index()] += row[f];
                    }
                    let mean = [sum[0] / counts[0] as f64, sum[1] / counts[1] as f64];
                    let mut sq = [0.0; 2];
                    for (row, label) in rows.iter().zip(&labels) {
                        let c = label.index();
                        sq[c] += (row[f] - mean[c]).powi(2);
                    }
                    let variance = [
                        (sq[0] / counts[0] as f64).max(VARIANCE_FLOOR),
                        (sq[1] / counts[1] as f64).max(VARIANCE_FLOOR),
                    ];
                    Conditional::Gaussian { mean, variance }
                }
            })
            .collect();

        let model = Self {
            input: InputSpec::of(train),
            prior,
            conditionals,
        };
        if !model.prior.iter().all(|p| p.is_finite()) {
            return Err(Error::NonFinite("class prior".into()));
        }
        Ok(model)
    }

    pub fn prior(&self) -> [f64; 2] {
        self.prior
    }

    pub fn conditionals(&self) -> &[Conditional] {
        &self.conditionals
    }

    /// Unnormalised log P(A) + Σ log P(B_f | A) for (negative, positive).
    pub fn log_scores(&self, instance: &Instance) -> Result<[f64; 2]> {
        let x = self.input.check(instance)?;
        let mut scores = [self.prior[0].ln(), self.prior[1].ln()];
        for (value, cond) in x.iter().zip(&self.conditionals) {
            for (c, score) in scores.iter_mut().enumerate() {
                *score += match cond {
                    Conditional::Categorical { probs } => probs[c][*value as usize].ln(),
                    Conditional::Gaussian { mean, variance } => {
                        -0.5 * (2.0 * PI * variance[c]).ln()
                            - (value - mean[c]).powi(2) / (2.0 * variance[c])
                    }
                };
            }
        }
        Ok(scores)
    }
}

/// Class posteriors (negative, positive) summing to one.
pub fn nb_posterior(model: &NaiveBayesModel, instance: &Instance) -> Result<[f64; 2]> {
    let [a, b] = model.log_scores(instance)?;
    let top = a.max(b);
    let (ea, eb) = ((a - top).exp(), (b - top).exp());
    let z = ea + eb;
    Ok([ea / z, eb / z])
}

impl Predictor for NaiveBayesModel {
    fn predict(&self, instance: &Instance) -> Result<Label> {
        let [neg, pos] = self.log_scores(instance)?;
        Ok(argmax_label(neg, pos))
    }
}
