//! Independent reference computations shared by the oracle tests and the
//! acceptance run. Each check returns a description of the first mismatch.

use rand::Rng;
use wrapsel_core::classifiers::c45::Node;
use wrapsel_core::classifiers::mlp::Network;
use wrapsel_core::classifiers::{gain_ratio, nb_posterior, svm_fit_smo, C45Model, NaiveBayesModel};
use wrapsel_core::dataset::FeatureKind;
use wrapsel_core::rng::rng_from_seed;
use wrapsel_core::{Dataset, Instance, Label, Predictor};

use super::{label, schema_of};

pub type Check = Result<String, String>;

// ---------- naive Bayes ----------

pub fn random_categorical(seed: u64) -> Dataset {
    let mut rng = rng_from_seed(seed);
    let n_features = rng.random_range(1..=4);
    let kinds: Vec<FeatureKind> = (0..n_features)
        .map(|_| FeatureKind::Categorical {
            arity: rng.random_range(2..=4),
        })
        .collect();
    let rows = rng.random_range(4..=30);
    let instances = (0..rows)
        .map(|r| {
            let values: Vec<f64> = kinds
                .iter()
                .map(|k| match k {
                    FeatureKind::Categorical { arity } => rng.random_range(0..*arity) as f64,
                    FeatureKind::Continuous => unreachable!(),
                })
                .collect();
            // first two rows pin both classes
            let positive = if r < 2 { r == 1 } else { rng.random::<bool>() };
            Instance::complete(&values, label(positive))
        })
        .collect();
    Dataset::new(schema_of(&kinds), instances).unwrap()
}

/// Posterior by counting: P(c) Π (count(v, c) + 1) / (n_c + arity), normalised.
pub fn brute_force_posterior(train: &Dataset, query: &[f64]) -> [f64; 2] {
    let mut joint = [0.0; 2];
    for (c, slot) in joint.iter_mut().enumerate() {
        let members: Vec<&Instance> = train
            .instances()
            .iter()
            .filter(|i| i.label.index() == c)
            .collect();
        let mut p = members.len() as f64 / train.len() as f64;
        for (f, &v) in query.iter().enumerate() {
            let FeatureKind::Categorical { arity } = train.schema().kind(f) else {
                unreachable!()
            };
            let hits = members.iter().filter(|i| i.values[f] == Some(v)).count();
            p *= (hits + 1) as f64 / (members.len() + arity as usize) as f64;
        }
        *slot = p;
    }
    let z = joint[0] + joint[1];
    [joint[0] / z, joint[1] / z]
}

pub fn naive_bayes_oracle(datasets: u64) -> Check {
    let mut worst = 0.0f64;
    for seed in 0..datasets {
        let d = random_categorical(seed);
        let model = NaiveBayesModel::fit(&d).map_err(|e| format!("dataset {seed}: {e}"))?;
        let mut rng = rng_from_seed(seed ^ 0xabc);
        let mut queries: Vec<Vec<f64>> = d.dense().unwrap();
        for _ in 0..10 {
            queries.push(
                (0..d.n_features())
                    .map(|f| match d.schema().kind(f) {
                        FeatureKind::Categorical { arity } => rng.random_range(0..arity) as f64,
                        FeatureKind::Continuous => unreachable!(),
                    })
                    .collect(),
            );
        }
        for q in queries {
            let got = nb_posterior(&model, &Instance::complete(&q, Label::Negative)).unwrap();
            let want = brute_force_posterior(&d, &q);
            for c in 0..2 {
                let err = (got[c] - want[c]).abs();
                worst = worst.max(err);
                if err > 1e-12 {
                    return Err(format!("dataset {seed}, query {q:?}: {got:?} vs {want:?}"));
                }
            }
        }
    }
    Ok(format!("{datasets} datasets, max abs error {worst:.1e}"))
}

// ---------- MLP ----------

fn weights_mut(net: &mut Network, layer: usize) -> &mut Vec<f64> {
    if layer == 0 {
        &mut net.hidden_weights
    } else {
        &mut net.output_weights
    }
}

/// Relative error with a floor on the scale so that two near-zero
/// derivatives do not register as a mismatch.
fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / (a.abs() + b.abs()).max(1e-6)
}

pub fn mlp_gradient_check(configurations: u64) -> Check {
    let h = 1e-5;
    let mut worst = 0.0f64;
    for seed in 0..configurations {
        let mut rng = rng_from_seed(1000 + seed);
        let inputs = rng.random_range(1..=6);
        let hidden = rng.random_range(1..=5);
        let mut net = Network::random(inputs, hidden, 2, &mut rng);
        // spread the weights beyond the initial range
        for w in net.hidden_weights.iter_mut().chain(net.output_weights.iter_mut()) {
            *w *= rng.random_range(0.5..4.0);
        }
        let x: Vec<f64> = (0..inputs).map(|_| rng.random_range(-1.0..1.0)).collect();
        let t = if rng.random::<bool>() { [1.0, 0.0] } else { [0.0, 1.0] };
        let grad = net.gradient(&x, &t);
        for layer in 0..2 {
            let analytic = if layer == 0 { &grad.hidden } else { &grad.output };
            for idx in 0..analytic.len() {
                let mut plus = net.clone();
                weights_mut(&mut plus, layer)[idx] += h;
                let mut minus = net.clone();
                weights_mut(&mut minus, layer)[idx] -= h;
                let numeric = (plus.loss(&x, &t) - minus.loss(&x, &t)) / (2.0 * h);
                let err = relative_error(analytic[idx], numeric);
                worst = worst.max(err);
                if err > 1e-4 {
                    return Err(format!(
                        "config {seed}, layer {layer}, weight {idx}: analytic {} vs numeric {numeric}",
                        analytic[idx]
                    ));
                }
            }
        }
    }
    Ok(format!("{configurations} configurations, max relative error {worst:.1e}"))
}

// ---------- SVM ----------

pub fn random_continuous(seed: u64) -> Dataset {
    let mut rng = rng_from_seed(2000 + seed);
    let n_features = rng.random_range(1..=3);
    let rows = rng.random_range(6..=30);
    let kinds = vec![FeatureKind::Continuous; n_features];
    let instances = (0..rows)
        .map(|r| {
            let positive = if r < 2 { r == 1 } else { rng.random::<bool>() };
            let shift = if positive { 0.7 } else { 0.0 };
            let values: Vec<f64> = (0..n_features)
                .map(|_| rng.random_range(-1.0..1.0) + shift)
                .collect();
            Instance::complete(&values, label(positive))
        })
        .collect();
    Dataset::new(schema_of(&kinds), instances).unwrap()
}

pub const KKT_TOL: f64 = 1e-3;

/// Largest KKT residual and |Σ α_i y_i| of a trained model on its training set.
pub fn kkt_residuals(d: &Dataset, penalty: f64, degree: u32) -> Result<(f64, f64), String> {
    let model = svm_fit_smo(d, penalty, degree, KKT_TOL, 0).map_err(|e| e.to_string())?;
    let mut alpha = vec![0.0; d.len()];
    for sv in model.support_vectors() {
        alpha[sv.index] = sv.alpha;
    }
    let mut worst = 0.0f64;
    let mut balance = 0.0;
    for (i, inst) in d.instances().iter().enumerate() {
        let y = if inst.label == Label::Positive { 1.0 } else { -1.0 };
        balance += alpha[i] * y;
        let margin = y * model.decision_value(inst).unwrap();
        let residual = if alpha[i] <= 0.0 {
            // α = 0  ⇒  y f ≥ 1
            (1.0 - margin).max(0.0)
        } else if alpha[i] >= penalty {
            // α = C  ⇒  y f ≤ 1
            (margin - 1.0).max(0.0)
        } else {
            (margin - 1.0).abs()
        };
        if !(0.0..=penalty).contains(&alpha[i]) {
            return Err(format!("alpha[{i}] = {} outside [0, {penalty}]", alpha[i]));
        }
        worst = worst.max(residual);
    }
    Ok((worst, f64::abs(balance)))
}

pub fn xor_dataset() -> Dataset {
    let kinds = [FeatureKind::Continuous, FeatureKind::Continuous];
    let instances = [(0.0, 0.0, false), (0.0, 1.0, true), (1.0, 0.0, true), (1.0, 1.0, false)]
        .iter()
        .map(|&(a, b, pos)| Instance::complete(&[a, b], label(pos)))
        .collect();
    Dataset::new(schema_of(&kinds), instances).unwrap()
}

pub fn svm_kkt_suite(datasets: u64) -> Check {
    let mut worst = 0.0f64;
    let mut worst_balance = 0.0f64;
    for seed in 0..datasets {
        let d = random_continuous(seed);
        let (residual, balance) = kkt_residuals(&d, 1.0, 2).map_err(|e| format!("dataset {seed}: {e}"))?;
        worst = worst.max(residual);
        worst_balance = worst_balance.max(balance);
        if residual > KKT_TOL {
            return Err(format!("dataset {seed}: KKT residual {residual:.3e}"));
        }
        if balance > 1e-6 {
            return Err(format!("dataset {seed}: |sum alpha y| = {balance:.3e}"));
        }
    }
    // C = 1 leaves every multiplier at the bound and misclassifies (0, 0);
    // separating XOR needs an effectively hard margin
    let xor = xor_dataset();
    let model = svm_fit_smo(&xor, 100.0, 2, KKT_TOL, 0).map_err(|e| e.to_string())?;
    let predicted = model.predict_all(&xor).unwrap();
    if predicted != xor.labels() {
        return Err(format!("xor predictions {predicted:?}"));
    }
    Ok(format!(
        "{datasets} datasets, max KKT residual {worst:.1e}, max |sum alpha y| {worst_balance:.1e}, xor separated"
    ))
}

// ---------- C4.5 ----------

/// The 14-day play-tennis table: outlook (sunny, overcast, rain),
/// temperature (hot, mild, cool), humidity (high, normal), windy (no, yes);
/// positive = play.
pub fn weather() -> Dataset {
    let kinds = [
        FeatureKind::Categorical { arity: 3 },
        FeatureKind::Categorical { arity: 3 },
        FeatureKind::Categorical { arity: 2 },
        FeatureKind::Categorical { arity: 2 },
    ];
    let rows: [([f64; 4], bool); 14] = [
        ([0., 0., 0., 0.], false),
        ([0., 0., 0., 1.], false),
        ([1., 0., 0., 0.], true),
        ([2., 1., 0., 0.], true),
        ([2., 2., 1., 0.], true),
        ([2., 2., 1., 1.], false),
        ([1., 2., 1., 1.], true),
        ([0., 1., 0., 0.], false),
        ([0., 2., 1., 0.], true),
        ([2., 1., 1., 0.], true),
        ([0., 1., 1., 1.], true),
        ([1., 1., 0., 1.], true),
        ([1., 0., 1., 0.], true),
        ([2., 1., 0., 1.], false),
    ];
    let schema = wrapsel_core::FeatureSchema::new(
        ["outlook", "temperature", "humidity", "windy"]
            .iter()
            .zip(kinds)
            .map(|(name, kind)| wrapsel_core::dataset::Feature {
                name: name.to_string(),
                kind,
            })
            .collect(),
        "play",
    )
    .unwrap();
    Dataset::new(
        schema,
        rows.iter().map(|(x, yes)| Instance::complete(x, label(*yes))).collect(),
    )
    .unwrap()
}

fn entropy(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.log2()
        })
        .sum()
}

/// Gain ratio of a multiway split, from class counts per branch.
pub fn hand_gain_ratio(branches: &[[usize; 2]]) -> f64 {
    let total: [usize; 2] = [
        branches.iter().map(|b| b[0]).sum(),
        branches.iter().map(|b| b[1]).sum(),
    ];
    let n = (total[0] + total[1]) as f64;
    let remainder: f64 = branches
        .iter()
        .map(|b| (b[0] + b[1]) as f64 / n * entropy(b))
        .sum();
    let sizes: Vec<usize> = branches.iter().map(|b| b[0] + b[1]).collect();
    (entropy(&total) - remainder) / entropy(&sizes)
}

pub fn c45_weather_oracle() -> Check {
    let d = weather();
    // [negative, positive] per branch, read off the table by hand
    let branches: [&[[usize; 2]]; 4] = [
        &[[3, 2], [0, 4], [2, 3]],
        &[[2, 2], [2, 4], [1, 3]],
        &[[4, 3], [1, 6]],
        &[[2, 6], [3, 3]],
    ];
    let mut ratios = Vec::new();
    for (f, b) in branches.iter().enumerate() {
        let want = hand_gain_ratio(b);
        let got = gain_ratio(&d, f, None).map_err(|e| e.to_string())?;
        if (got - want).abs() > 1e-9 {
            return Err(format!("feature {f}: gain ratio {got} vs hand {want}"));
        }
        ratios.push(got);
    }
    // textbook value for outlook: 0.247 / 1.577
    if (ratios[0] - 0.156).abs() > 1e-3 {
        return Err(format!("outlook gain ratio {} far from 0.156", ratios[0]));
    }
    let model = C45Model::grow(&d, 2).map_err(|e| e.to_string())?;
    match model.root() {
        Node::Split { feature: 0, .. } => Ok(format!(
            "gain ratios {:?}, root = outlook",
            ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>()
        )),
        other => Err(format!("root is {other:?}")),
    }
}

// ---------- wrappers ----------

/// BFS with an open-ended stall limit explores the whole lattice, so it must
/// reach the exhaustive optimum exactly; the GA gets 0.02 of slack in at
/// least 9 of 10 seeds.
pub fn wrapper_oracle(datasets: u64) -> Check {
    use wrapsel_core::wrappers::{bfs_select, ga_select, GaConfig, SearchBudget};
    use wrapsel_core::ClassifierKind;

    let kind = ClassifierKind::NaiveBayes;
    let generous = SearchBudget {
        max_expansions_without_improvement: 1 << 10,
        max_subset_evaluations: 1 << 10,
    };
    let mut summary = Vec::new();
    for ds in 0..datasets {
        let n = 4 + (ds as usize % 5);
        let d = super::synthetic(n, 2 + ds as usize % 2, 60, 300 + ds);
        let (_, optimum) = super::exhaustive_optimum(&d, &kind, 5, ds);
        let bfs = bfs_select(&d, &kind, &generous, 5, ds).map_err(|e| e.to_string())?;
        if bfs.best_fitness != optimum {
            return Err(format!("dataset {ds} ({n} features): bfs {} vs optimum {optimum}", bfs.best_fitness));
        }
        let mut close = 0;
        for seed in 0..10 {
            let (_, optimum) = super::exhaustive_optimum(&d, &kind, 5, seed);
            let cfg = GaConfig {
                seed,
                ..GaConfig::default()
            };
            let ga = ga_select(&d, &kind, &cfg).map_err(|e| e.to_string())?;
            if ga.best_fitness >= optimum - 0.02 {
                close += 1;
            }
        }
        if close < 9 {
            return Err(format!("dataset {ds} ({n} features): ga within 0.02 in only {close}/10 seeds"));
        }
        summary.push(format!("{n}f ga {close}/10"));
    }
    Ok(format!("bfs exact on all {datasets} datasets; {}", summary.join(", ")))
}
