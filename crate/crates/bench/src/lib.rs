//! Synthetic datasets for the benchmarks.

use rand::Rng;
use wrapsel_core::dataset::{Feature, FeatureKind, FeatureSchema};
use wrapsel_core::rng::rng_from_seed;
use wrapsel_core::{Dataset, Instance, Label};

/// Alternating continuous / ternary categorical columns named `f0`, `f1`, ...
pub fn schema(n_features: usize) -> FeatureSchema {
    let features = (0..n_features)
        .map(|i| Feature {
            name: format!("f{i}"),
            kind: if i % 2 == 0 {
                FeatureKind::Continuous
            } else {
                FeatureKind::Categorical { arity: 3 }
            },
        })
        .collect();
    FeatureSchema::new(features, "class").expect("generated names are unique")
}

/// Cleveland-sized mixed data: the first `informative` columns lean toward the
/// class 75% of the time, the rest are noise. Balanced classes, no missing cells.
pub fn mixed(n_features: usize, informative: usize, rows: usize, seed: u64) -> Dataset {
    let schema = schema(n_features);
    let mut rng = rng_from_seed(seed);
    let instances = (0..rows)
        .map(|r| {
            let positive = r % 2 == 0;
            let values: Vec<f64> = (0..n_features)
                .map(|i| {
                    let signal = i < informative && rng.random::<f64>() < 0.75;
                    match schema.kind(i) {
                        FeatureKind::Continuous => {
                            rng.random::<f64>() * 2.0 + if signal && positive { 1.5 } else { 0.0 }
                        }
                        FeatureKind::Categorical { arity } => match (signal, positive) {
                            (true, true) => 2.0,
                            (true, false) => 0.0,
                            _ => rng.random_range(0..arity) as f64,
                        },
                    }
                })
                .collect();
            let label = if positive { Label::Positive } else { Label::Negative };
            Instance::complete(&values, label)
        })
        .collect();
    Dataset::new(schema, instances).expect("generated rows match the schema")
}

/// The shape most benches use: 13 features, 4 informative, 270 rows.
pub fn cleveland_like(seed: u64) -> Dataset {
    mixed(13, 4, 270, seed)
}
