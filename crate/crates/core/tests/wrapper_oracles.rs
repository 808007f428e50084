mod common;

use std::collections::HashSet;

use rand::Rng;
use wrapsel_core::dataset::FeatureKind;
use wrapsel_core::rng::rng_from_seed;
use wrapsel_core::wrappers::{
    bfs_select, fitness, ga_select, ga_select_from, mutate, sffs_select, two_point_crossover, GaConfig,
    SearchBudget, SffsConfig, WrapperResult,
};
use wrapsel_core::{ClassifierKind, Dataset, FeatureMask, Instance};

use common::{exhaustive_optimum, label, perfect_feature, schema_of, synthetic};

const NB: ClassifierKind = ClassifierKind::NaiveBayes;

fn check_result_contract(r: &WrapperResult, d: &Dataset, folds: usize, seed: u64) {
    assert!(!r.best_mask.none_selected());
    assert!((0.0..=1.0).contains(&r.best_fitness));
    assert_eq!(r.best_fitness, fitness(&r.best_mask, d, &NB, folds, seed).unwrap());
    assert!(r.fits <= r.evaluations * folds);
    assert_eq!(r.visited.len(), r.evaluations);
    let unique: HashSet<_> = r.visited.iter().collect();
    assert_eq!(unique.len(), r.visited.len(), "visited masks repeat");
    assert!(r.history.windows(2).all(|w| w[1].best_fitness >= w[0].best_fitness));
    assert_eq!(r.selected_features.len(), r.best_mask.count_ones());
}

#[test]
fn bfs_and_ga_against_exhaustive_search() {
    match common::oracles::wrapper_oracle(5) {
        Ok(detail) => eprintln!("{detail}"),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn fitness_examples() {
    let d = perfect_feature(3, 30, 1);
    assert_eq!(fitness(&FeatureMask::parse("100").unwrap(), &d, &NB, 5, 0).unwrap(), 1.0);

    let instances = (0..40)
        .map(|i| Instance::complete(&[1.0, (i % 7) as f64], label(i % 2 == 0)))
        .collect();
    let flat = Dataset::new(
        schema_of(&[FeatureKind::Categorical { arity: 2 }, FeatureKind::Continuous]),
        instances,
    )
    .unwrap();
    let acc = fitness(&FeatureMask::parse("10").unwrap(), &flat, &NB, 5, 0).unwrap();
    assert!((acc - 0.5).abs() <= 0.1, "{acc}");
    let again = fitness(&FeatureMask::parse("10").unwrap(), &flat, &NB, 5, 0).unwrap();
    assert_eq!(acc.to_bits(), again.to_bits());
    assert!(fitness(&FeatureMask::zeros(2), &flat, &NB, 5, 0).is_err());
}

#[test]
fn crossover_preserves_pairwise_content() {
    let mut rng = rng_from_seed(4);
    for _ in 0..200 {
        let n = rng.random_range(1..20);
        let a = FeatureMask::from_bits((0..n).map(|_| rng.random()).collect());
        let b = FeatureMask::from_bits((0..n).map(|_| rng.random()).collect());
        let cut1 = rng.random_range(0..n);
        let cut2 = rng.random_range(cut1 + 1..=n);
        let (c1, c2) = two_point_crossover(&a, &b, cut1, cut2);
        for i in 0..n {
            assert_eq!(c1.get(i) ^ c2.get(i), a.get(i) ^ b.get(i));
            assert_eq!(c1.get(i) as u8 + c2.get(i) as u8, a.get(i) as u8 + b.get(i) as u8);
        }
    }
}

#[test]
fn mutation_flip_rate_is_binomial() {
    let mut rng = rng_from_seed(17);
    let start = FeatureMask::ones(13);
    let trials = 100_000;
    let flips: usize = (0..trials)
        .map(|_| {
            let m = mutate(&start, 0.09, &mut rng);
            (0..13).filter(|&i| m.get(i) != start.get(i)).count()
        })
        .sum();
    let mean = flips as f64 / trials as f64;
    let sigma = (13.0 * 0.09 * 0.91 / trials as f64).sqrt();
    assert!((mean - 13.0 * 0.09).abs() <= 3.0 * sigma, "mean flips {mean}");
}

#[test]
fn ga_finds_the_perfect_feature() {
    let d = perfect_feature(10, 60, 3);
    let r = ga_select(&d, &NB, &GaConfig::default()).unwrap();
    assert!(r.best_mask.get(0), "{}", r.best_mask);
    assert_eq!(r.best_fitness, 1.0);
    assert_eq!(r.history.len(), GaConfig::default().generations);
    check_result_contract(&r, &d, 5, 0);
}

#[test]
fn ga_single_generation_keeps_seeded_all_ones() {
    let d = synthetic(6, 2, 50, 8);
    let cfg = GaConfig {
        generations: 1,
        population_size: 4,
        seed: 2,
        ..GaConfig::default()
    };
    let initial = vec![
        FeatureMask::ones(6),
        FeatureMask::parse("100000").unwrap(),
        FeatureMask::parse("000000").unwrap(),
        FeatureMask::parse("010101").unwrap(),
    ];
    let r = ga_select_from(&d, &NB, &cfg, Some(initial)).unwrap();
    assert!(r.best_fitness >= fitness(&FeatureMask::ones(6), &d, &NB, 5, 2).unwrap());
    check_result_contract(&r, &d, 5, 2);
}

#[test]
fn ga_is_deterministic_and_seed_sensitive() {
    let d = synthetic(8, 3, 60, 5);
    let cfg = GaConfig {
        seed: 9,
        generations: 10,
        ..GaConfig::default()
    };
    let a = ga_select(&d, &NB, &cfg).unwrap();
    let b = ga_select(&d, &NB, &cfg).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    check_result_contract(&a, &d, 5, 9);
    let other = ga_select(&d, &NB, &GaConfig { seed: 10, ..cfg }).unwrap();
    assert_ne!(a.visited, other.visited);
}

#[test]
fn ga_rejects_invalid_config_with_every_violation() {
    let d = synthetic(4, 2, 30, 1);
    let cfg = GaConfig {
        population_size: 0,
        mutation_prob: 2.0,
        ..GaConfig::default()
    };
    match ga_select(&d, &NB, &cfg) {
        Err(wrapsel_core::Error::Config(v)) => {
            assert_eq!(v.len(), 2);
            assert!(v[0].contains("population_size"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn bfs_single_feature() {
    let d = perfect_feature(1, 20, 0);
    let r = bfs_select(&d, &NB, &SearchBudget::default(), 5, 0).unwrap();
    assert_eq!(r.best_mask.to_string(), "1");
    assert_eq!(r.evaluations, 1);
}

#[test]
fn bfs_default_budget_matches_exhaustive_on_four_features() {
    for seed in 0..5 {
        let d = synthetic(4, 2, 50, 40 + seed);
        let (_, optimum) = exhaustive_optimum(&d, &NB, 5, seed);
        let r = bfs_select(&d, &NB, &SearchBudget::default(), 5, seed).unwrap();
        assert_eq!(r.best_fitness, optimum, "seed {seed}");
        assert!(!r.truncated);
        check_result_contract(&r, &d, 5, seed);
    }
}

#[test]
fn bfs_flags_truncation() {
    let d = synthetic(6, 2, 40, 2);
    let budget = SearchBudget {
        max_subset_evaluations: 8,
        ..SearchBudget::default()
    };
    let r = bfs_select(&d, &NB, &budget, 5, 0).unwrap();
    assert!(r.truncated);
    assert!(r.evaluations <= 8);
    check_result_contract(&r, &d, 5, 0);
}

#[test]
fn sffs_adds_the_perfect_feature_first() {
    let d = perfect_feature(6, 45, 4);
    let r = sffs_select(&d, &NB, &SffsConfig::default()).unwrap();
    assert_eq!(r.history[0].note, "+0");
    assert_eq!(r.best_fitness, 1.0);
    assert_eq!(r.best_mask.to_string(), "100000");
    check_result_contract(&r, &d, 5, 0);
}

/// Feature f fires only for the positives of row block f and is zero
/// everywhere else, so a subset misclassifies exactly the positives of the
/// blocks it leaves out: every added feature strictly raises accuracy.
fn independent_helpers(n_features: usize, block: usize) -> Dataset {
    let rows = n_features * block * 2;
    let instances = (0..rows)
        .map(|r| {
            let positive = r % 2 == 0;
            let owner = r / (2 * block);
            let values: Vec<f64> = (0..n_features)
                .map(|f| (f == owner && positive) as u8 as f64)
                .collect();
            Instance::complete(&values, label(positive))
        })
        .collect();
    Dataset::new(schema_of(&vec![FeatureKind::Categorical { arity: 2 }; n_features]), instances).unwrap()
}

#[test]
fn sffs_monotone_trace_has_no_removals() {
    let d = independent_helpers(4, 20);
    let r = sffs_select(&d, &NB, &SffsConfig::default()).unwrap();
    let notes: Vec<&str> = r.history.iter().map(|h| h.note.as_str()).collect();
    assert!(notes.iter().all(|n| n.starts_with('+')), "{notes:?}");
    assert_eq!(notes.len(), 4, "{notes:?}");
    assert_eq!(r.best_mask, FeatureMask::ones(4));
    check_result_contract(&r, &d, 5, 0);
}

#[test]
fn sffs_is_deterministic() {
    let d = synthetic(7, 3, 60, 6);
    let cfg = SffsConfig {
        seed: 3,
        ..SffsConfig::default()
    };
    let a = sffs_select(&d, &NB, &cfg).unwrap();
    assert_eq!(a.to_json().unwrap(), sffs_select(&d, &NB, &cfg).unwrap().to_json().unwrap());
    check_result_contract(&a, &d, 5, 3);
}

#[test]
fn wrappers_reject_training_sets_too_small_for_internal_folds() {
    let d = synthetic(3, 1, 4, 0);
    let err = ga_select(&d, &NB, &GaConfig::default()).unwrap_err();
    assert!(matches!(err.root(), wrapsel_core::Error::TooFewPerClass { .. }), "{err}");
}
