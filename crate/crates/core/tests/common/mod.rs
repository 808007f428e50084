#![allow(dead_code)]

pub mod oracles;

use rand::Rng;
use wrapsel_core::dataset::{parse_uci_cleveland, Feature, FeatureKind, FeatureSchema};
use wrapsel_core::rng::rng_from_seed;
use wrapsel_core::wrappers::fitness;
use wrapsel_core::{ClassifierKind, Dataset, FeatureMask, Instance, Label};

pub fn cleveland() -> Dataset {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/processed.cleveland.data");
    let text = std::fs::read_to_string(path).expect("cleveland data file");
    parse_uci_cleveland(&text).expect("cleveland parses")
}

pub fn label(positive: bool) -> Label {
    if positive {
        Label::Positive
    } else {
        Label::Negative
    }
}

pub fn schema_of(kinds: &[FeatureKind]) -> FeatureSchema {
    FeatureSchema::new(
        kinds
            .iter()
            .enumerate()
            .map(|(i, &kind)| Feature {
                name: format!("f{i}"),
                kind,
            })
            .collect(),
        "y",
    )
    .unwrap()
}

/// Mixed-type dataset where the first `informative` features carry a noisy
/// signal and the rest are noise. Classes alternate row by row.
pub fn synthetic(n_features: usize, informative: usize, rows: usize, seed: u64) -> Dataset {
    let mut rng = rng_from_seed(seed);
    let kinds: Vec<FeatureKind> = (0..n_features)
        .map(|i| {
            if i % 2 == 0 {
                FeatureKind::Continuous
            } else {
                FeatureKind::Categorical { arity: 3 }
            }
        })
        .collect();
    let instances = (0..rows)
        .map(|r| {
            let positive = r % 2 == 0;
            let values: Vec<f64> = kinds
                .iter()
                .enumerate()
                .map(|(i, kind)| {
                    let signal = i < informative && rng.random::<f64>() < 0.75;
                    match kind {
                        FeatureKind::Continuous => {
                            let shift = if signal && positive { 1.5 } else { 0.0 };
                            rng.random::<f64>() * 2.0 + shift
                        }
                        FeatureKind::Categorical { arity } => {
                            if signal {
                                if positive { 2.0 } else { 0.0 }
                            } else {
                                rng.random_range(0..*arity) as f64
                            }
                        }
                    }
                })
                .collect();
            Instance::complete(&values, label(positive))
        })
        .collect();
    Dataset::new(schema_of(&kinds), instances).unwrap()
}

/// Feature 0 is a copy of the label; the others are random binary noise.
pub fn perfect_feature(n_features: usize, rows: usize, seed: u64) -> Dataset {
    let mut rng = rng_from_seed(seed);
    let kinds = vec![FeatureKind::Categorical { arity: 2 }; n_features];
    let instances = (0..rows)
        .map(|r| {
            let positive = r % 3 != 0;
            let mut values = vec![if positive { 1.0 } else { 0.0 }];
            values.extend((1..n_features).map(|_| rng.random_range(0..2) as f64));
            Instance::complete(&values, label(positive))
        })
        .collect();
    Dataset::new(schema_of(&kinds), instances).unwrap()
}

pub fn all_nonempty_masks(n: usize) -> impl Iterator<Item = FeatureMask> {
    (1u32..(1 << n)).map(move |bits| FeatureMask::from_bits((0..n).map(|i| bits >> i & 1 == 1).collect()))
}

/// Best fitness over every non-empty mask, computed one mask at a time.
pub fn exhaustive_optimum(d: &Dataset, kind: &ClassifierKind, folds: usize, seed: u64) -> (FeatureMask, f64) {
    let mut best: Option<(FeatureMask, f64)> = None;
    for m in all_nonempty_masks(d.n_features()) {
        let f = fitness(&m, d, kind, folds, seed).unwrap();
        if best.as_ref().is_none_or(|(_, b)| f > *b) {
            best = Some((m, f));
        }
    }
    best.unwrap()
}

/// Flip the labels of each held-out fold in turn (and blank its cells) and
/// confirm the mask chosen for that fold does not move.
pub fn leakage_check(
    d: &Dataset,
    wrapper: wrapsel_core::WrapperChoice,
    kind: &ClassifierKind,
    cfg: &wrapsel_core::CvConfig,
    seed: u64,
    folds_to_poison: usize,
) -> Result<String, String> {
    use wrapsel_core::dataset::stratified_folds;
    use wrapsel_core::evaluation::outer_cv_with_folds;

    let folds = stratified_folds(d, cfg.folds, seed).map_err(|e| e.to_string())?;
    let clean = outer_cv_with_folds(d, &folds, wrapper, kind, cfg, seed).map_err(|e| e.to_string())?;
    for j in 0..folds_to_poison.min(cfg.folds) {
        let held_out = folds.test_indices(j);
        let instances = d
            .instances()
            .iter()
            .enumerate()
            .map(|(i, inst)| {
                if held_out.contains(&i) {
                    Instance::new(vec![None; inst.values.len()], inst.label.flip())
                } else {
                    inst.clone()
                }
            })
            .collect();
        let poisoned = Dataset::new(d.schema().clone(), instances).unwrap();
        let report = outer_cv_with_folds(&poisoned, &folds, wrapper, kind, cfg, seed)
            .map_err(|e| format!("poisoned fold {j}: {e}"))?;
        let (before, after) = (&clean.per_fold[j], &report.per_fold[j]);
        if before.mask != after.mask || before.wrapper_fitness != after.wrapper_fitness {
            return Err(format!("fold {j}: mask {} became {}", before.mask, after.mask));
        }
    }
    Ok(format!(
        "{} folds poisoned, masks unchanged",
        folds_to_poison.min(cfg.folds)
    ))
}
