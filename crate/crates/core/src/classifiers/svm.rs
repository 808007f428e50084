//! Soft-margin SVM with polynomial kernel `K(u, v) = (u·v + 1)^degree`,
//! trained by sequential minimal optimization.
//!
//! Each step optimises the maximal violating pair analytically (working-set
//! selection on the dual gradient), so every iteration preserves
//! `Σ α_i y_i = 0` and `0 ≤ α_i ≤ C`. The loop stops once the violation gap
//! drops below `tol`, which bounds every KKT residual by `tol`.

use serde::{Deserialize, Serialize};

use super::{check_trainable, InputSpec, MinMaxScaler, Predictor};
use crate::dataset::{Dataset, Instance, Label};
use crate::error::{Error, Result};

pub const MAX_PAIR_OPTIMIZATIONS: usize = 1_000_000;
const TAU: f64 = 1e-12;

pub fn polynomial_kernel(u: &[f64], v: &[f64], degree: u32) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    (dot + 1.0).powi(degree as i32)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportVector {
    /// Row of the training set this vector came from.
    pub index: usize,
    /// Scaled feature vector.
    pub x: Vec<f64>,
    /// +1 positive, −1 negative.
    pub y: f64,
    pub alpha: f64,
}

/// Dual solution over the full training set.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
}

/// Solve the SVM dual on pre-scaled rows with labels in {+1, −1}.
pub fn smo_solve(
    x: &[Vec<f64>],
    y: &[f64],
    penalty: f64,
    degree: u32,
    tol: f64,
    max_iterations: usize,
) -> Result<SmoSolution> {
    let n = x.len();
    let mut kernel = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let k = polynomial_kernel(&x[i], &x[j], degree);
            if !k.is_finite() {
                return Err(Error::NonFinite(format!("kernel entry ({i}, {j})")));
            }
            kernel[i * n + j] = k;
            kernel[j * n + i] = k;
        }
    }
    let q = |i: usize, j: usize| y[i] * y[j] * kernel[i * n + j];

    let mut alpha = vec![0.0; n];
    // gradient of ½αᵀQα − eᵀα
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < penalty) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < penalty);

    let mut iterations = 0;
    loop {
        let mut i = usize::MAX;
        let mut j = usize::MAX;
        let mut g_max = f64::NEG_INFINITY;
        let mut g_min = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > g_max {
                g_max = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < g_min {
                g_min = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || g_max - g_min < tol {
            break;
        }
        if iterations >= max_iterations {
            return Err(Error::NonConvergence { iterations });
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > penalty {
                    alpha[i] = penalty;
                    alpha[j] = penalty - diff;
                }
            } else if alpha[j] > penalty {
                alpha[j] = penalty;
                alpha[i] = penalty + diff;
            }
        } else {
            let mut quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > penalty {
                if alpha[i] > penalty {
                    alpha[i] = penalty;
                    alpha[j] = sum - penalty;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > penalty {
                if alpha[j] > penalty {
                    alpha[j] = penalty;
                    alpha[i] = sum - penalty;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (d_i, d_j) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += q(t, i) * d_i + q(t, j) * d_j;
        }
        if !(alpha[i].is_finite() && alpha[j].is_finite()) {
            return Err(Error::NonFinite("SMO multiplier".into()));
        }
    }

    // rho from free vectors, else the middle of the feasible interval
    let mut free_sum = 0.0;
    let mut free = 0usize;
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] > 0.0 && alpha[t] < penalty {
            free_sum += yg;
            free += 1;
        } else if in_up(alpha[t], y[t]) {
            // at a bound and only movable upward: rho <= yG
            upper = upper.min(yg);
        } else {
            lower = lower.max(yg);
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else if lower.is_finite() && upper.is_finite() {
        (lower + upper) / 2.0
    } else if lower.is_finite() {
        lower
    } else {
        upper
    };
    Ok(SmoSolution {
        alpha,
        bias: -rho,
        iterations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    input: InputSpec,
    scaler: MinMaxScaler,
    degree: u32,
    penalty: f64,
    bias: f64,
    support: Vec<SupportVector>,
    iterations: usize,
}

impl SvmModel {
    pub fn support_vectors(&self) -> &[SupportVector] {
        &self.support
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn scale(&self, instance: &Instance) -> Result<Vec<f64>> {
        Ok(self.scaler.transform(&self.input.check(instance)?))
    }

    /// `Σ α_i y_i K(x_i, x) + b` for an already-scaled vector.
    pub fn decision_scaled(&self, x: &[f64]) -> f64 {
        self.support
            .iter()
            .map(|sv| sv.alpha * sv.y * polynomial_kernel(&sv.x, x, self.degree))
            .sum::<f64>()
            + self.bias
    }

    pub fn decision_value(&self, instance: &Instance) -> Result<f64> {
        Ok(self.decision_scaled(&self.scale(instance)?))
    }
}

impl Predictor for SvmModel {
    fn predict(&self, instance: &Instance) -> Result<Label> {
        Ok(if self.decision_value(instance)? > 0.0 {
            Label::Positive
        } else {
            Label::Negative
        })
    }
}

/// Fit on `train` after min-max scaling with training statistics. The solver
/// is deterministic; `seed` is accepted for interface uniformity.
pub fn svm_fit_smo(train: &Dataset, penalty: f64, degree: u32, tol: f64, _seed: u64) -> Result<SvmModel> {
    check_trainable(train)?;
    let raw = train.dense()?;
    let scaler = MinMaxScaler::fit(&raw);
    let x: Vec<Vec<f64>> = raw.iter().map(|r| scaler.transform(r)).collect();
    let y: Vec<f64> = train
        .labels()
        .iter()
        .map(|l| if *l == Label::Positive { 1.0 } else { -1.0 })
        .collect();
    let sol = smo_solve(&x, &y, penalty, degree, tol, MAX_PAIR_OPTIMIZATIONS)?;
    let support = (0..x.len())
        .filter(|&i| sol.alpha[i] > 0.0)
        .map(|i| SupportVector {
            index: i,
            x: x[i].clone(),
            y: y[i],
            alpha: sol.alpha[i],
        })
        .collect();
    Ok(SvmModel {
        input: InputSpec::of(train),
        scaler,
        degree,
        penalty,
        bias: sol.bias,
        support,
        iterations: sol.iterations,
    })
}
