//! One-hidden-layer perceptron, logistic units throughout, trained online with
//! plain back-propagation (no momentum, no weight decay).
//!
//! Per instance the output error is `e_j = d_j − y_j`, the instantaneous loss
//! is `ξ = ½ Σ e_j²`, and every weight moves by `−δ ∂ξ/∂w`.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{argmax_label, check_trainable, InputSpec, MinMaxScaler, Predictor};
use crate::dataset::{Dataset, Instance, Label};
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, ChaCha8Rng};

pub const OUTPUTS: usize = 2;
pub const INIT_RANGE: f64 = 0.5;

/// ⌈(inputs + outputs) / 2⌉
pub fn default_hidden(inputs: usize) -> usize {
    (inputs + OUTPUTS).div_ceil(2).max(1)
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Weights are row-major with the bias as the last row:
/// `hidden_weights[i * hidden + j]` connects input `i` (or the bias when
/// `i == inputs`) to hidden unit `j`; `output_weights` likewise for
/// hidden → output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub inputs: usize,
    pub hidden: usize,
    pub outputs: usize,
    pub hidden_weights: Vec<f64>,
    pub output_weights: Vec<f64>,
}

/// ∂ξ/∂w with the same layout as [`Network`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub hidden: Vec<f64>,
    pub output: Vec<f64>,
}

impl Network {
    pub fn random(inputs: usize, hidden: usize, outputs: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut draw = |len: usize| -> Vec<f64> {
            (0..len)
                .map(|_| rng.random_range(-INIT_RANGE..=INIT_RANGE))
                .collect()
        };
        let hidden_weights = draw((inputs + 1) * hidden);
        let output_weights = draw((hidden + 1) * outputs);
        Self {
            inputs,
            hidden,
            outputs,
            hidden_weights,
            output_weights,
        }
    }

    /// Hidden and output activations.
    pub fn forward(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let h: Vec<f64> = (0..self.hidden)
            .map(|j| {
                let mut z = self.hidden_weights[self.inputs * self.hidden + j];
                for (i, xi) in x.iter().enumerate() {
                    z += xi * self.hidden_weights[i * self.hidden + j];
                }
                sigmoid(z)
            })
            .collect();
        let y = (0..self.outputs)
            .map(|k| {
                let mut z = self.output_weights[self.hidden * self.outputs + k];
                for (j, hj) in h.iter().enumerate() {
                    z += hj * self.output_weights[j * self.outputs + k];
                }
                sigmoid(z)
            })
            .collect();
        (h, y)
    }

    /// ξ = ½ Σ (d − y)²
    pub fn loss(&self, x: &[f64], target: &[f64]) -> f64 {
        let (_, y) = self.forward(x);
        0.5 * target.iter().zip(&y).map(|(d, y)| (d - y).powi(2)).sum::<f64>()
    }

    pub fn gradient(&self, x: &[f64], target: &[f64]) -> Gradient {
        let (h, y) = self.forward(x);
        // ∂ξ/∂z_k = −e_k · y_k (1 − y_k)
        let out_delta: Vec<f64> = (0..self.outputs)
            .map(|k| -(target[k] - y[k]) * y[k] * (1.0 - y[k]))
            .collect();
        let mut output = vec![0.0; self.output_weights.len()];
        for k in 0..self.outputs {
            for j in 0..self.hidden {
                output[j * self.outputs + k] = out_delta[k] * h[j];
            }
            output[self.hidden * self.outputs + k] = out_delta[k];
        }
        let mut hidden = vec![0.0; self.hidden_weights.len()];
        for j in 0..self.hidden {
            let back: f64 = (0..self.outputs)
                .map(|k| self.output_weights[j * self.outputs + k] * out_delta[k])
                .sum();
            let delta = back * h[j] * (1.0 - h[j]);
            for (i, xi) in x.iter().enumerate() {
                hidden[i * self.hidden + j] = delta * xi;
            }
            hidden[self.inputs * self.hidden + j] = delta;
        }
        Gradient { hidden, output }
    }

    fn step(&mut self, grad: &Gradient, learning_rate: f64) {
        for (w, g) in self.hidden_weights.iter_mut().zip(&grad.hidden) {
            *w -= learning_rate * g;
        }
        for (w, g) in self.output_weights.iter_mut().zip(&grad.output) {
            *w -= learning_rate * g;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.hidden_weights
            .iter()
            .chain(&self.output_weights)
            .all(|w| w.is_finite())
    }
}

/// One-hot target: output 0 negative, output 1 positive.
pub fn target(label: Label) -> [f64; OUTPUTS] {
    match label {
        Label::Negative => [1.0, 0.0],
        Label::Positive => [0.0, 1.0],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    input: InputSpec,
    scaler: MinMaxScaler,
    network: Network,
    learning_rate: f64,
    epochs: usize,
    /// Σ ξ over each epoch, accumulated before each update.
    epoch_errors: Vec<f64>,
}

impl MlpModel {
    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn epoch_errors(&self) -> &[f64] {
        &self.epoch_errors
    }

    pub fn outputs(&self, instance: &Instance) -> Result<Vec<f64>> {
        let x = self.scaler.transform(&self.input.check(instance)?);
        Ok(self.network.forward(&x).1)
    }
}

impl Predictor for MlpModel {
    fn predict(&self, instance: &Instance) -> Result<Label> {
        let y = self.outputs(instance)?;
        Ok(argmax_label(y[0], y[1]))
    }
}

/// The weights `mlp_fit_backprop` starts from for the same arguments.
pub fn initial_network(inputs: usize, hidden: usize, seed: u64) -> Network {
    Network::random(inputs, hidden, OUTPUTS, &mut rng_from_seed(seed))
}

/// Online back-propagation for `epochs` passes, visiting instances in a
/// fresh seeded shuffle each pass.
pub fn mlp_fit_backprop(
    train: &Dataset,
    hidden: usize,
    learning_rate: f64,
    epochs: usize,
    seed: u64,
) -> Result<MlpModel> {
    check_trainable(train)?;
    if hidden == 0 {
        return Err(Error::Config(vec!["mlp.hidden must be >= 1".into()]));
    }
    let raw = train.dense()?;
    let scaler = MinMaxScaler::fit(&raw);
    let x: Vec<Vec<f64>> = raw.iter().map(|r| scaler.transform(r)).collect();
    let targets: Vec<[f64; OUTPUTS]> = train.labels().into_iter().map(target).collect();

    let mut rng = rng_from_seed(seed);
    let mut network = Network::random(train.n_features(), hidden, OUTPUTS, &mut rng);
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut epoch_errors = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            total += network.loss(&x[i], &targets[i]);
            let grad = network.gradient(&x[i], &targets[i]);
            network.step(&grad, learning_rate);
        }
        if !network.is_finite() || !total.is_finite() {
            return Err(Error::NonFinite(format!("MLP weights after epoch {epoch}")));
        }
        epoch_errors.push(total);
    }
    Ok(MlpModel {
        input: InputSpec::of(train),
        scaler,
        network,
        learning_rate,
        epochs,
        epoch_errors,
    })
}
