//! From-scratch binary classifiers behind one fit/predict contract.

pub mod c45;
pub mod mlp;
pub mod naive_bayes;
pub mod svm;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureKind, Instance, Label};
use crate::error::{Error, Result};

pub use c45::{c45_prune, gain_ratio, C45Model};
pub use mlp::{mlp_fit_backprop, MlpModel};
pub use naive_bayes::{nb_posterior, NaiveBayesModel};
pub use svm::{svm_fit_smo, SvmModel};

pub const DEFAULT_C45_MIN_LEAF: usize = 2;
pub const DEFAULT_C45_CONFIDENCE: f64 = 0.25;
pub const DEFAULT_SVM_PENALTY: f64 = 1.0;
pub const DEFAULT_SVM_DEGREE: u32 = 2;
pub const DEFAULT_SVM_TOL: f64 = 1e-3;
pub const DEFAULT_MLP_LEARNING_RATE: f64 = 0.3;
pub const DEFAULT_MLP_EPOCHS: usize = 500;

/// Learner choice plus hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierKind {
    NaiveBayes,
    C45 {
        min_leaf: usize,
        confidence: f64,
        prune: bool,
    },
    Svm {
        penalty: f64,
        degree: u32,
        tol: f64,
    },
    Mlp {
        /// `None` sizes the hidden layer as ⌈(inputs + 2) / 2⌉.
        hidden: Option<usize>,
        learning_rate: f64,
        epochs: usize,
    },
}

impl ClassifierKind {
    pub fn c45() -> Self {
        ClassifierKind::C45 {
            min_leaf: DEFAULT_C45_MIN_LEAF,
            confidence: DEFAULT_C45_CONFIDENCE,
            prune: true,
        }
    }

    pub fn svm() -> Self {
        ClassifierKind::Svm {
            penalty: DEFAULT_SVM_PENALTY,
            degree: DEFAULT_SVM_DEGREE,
            tol: DEFAULT_SVM_TOL,
        }
    }

    pub fn mlp() -> Self {
        ClassifierKind::Mlp {
            hidden: None,
            learning_rate: DEFAULT_MLP_LEARNING_RATE,
            epochs: DEFAULT_MLP_EPOCHS,
        }
    }

    /// Defaults for every kind, in grid column order.
    pub fn defaults() -> [ClassifierKind; 4] {
        [ClassifierKind::NaiveBayes, Self::svm(), Self::mlp(), Self::c45()]
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            ClassifierKind::NaiveBayes => "nb",
            ClassifierKind::C45 { .. } => "c45",
            ClassifierKind::Svm { .. } => "svm",
            ClassifierKind::Mlp { .. } => "mlp",
        }
    }

    /// Column heading used in the comparison table.
    pub fn label(&self) -> &'static str {
        match self {
            ClassifierKind::NaiveBayes => "BN",
            ClassifierKind::C45 { .. } => "C4.5",
            ClassifierKind::Svm { .. } => "SVM",
            ClassifierKind::Mlp { .. } => "MLP",
        }
    }

    /// Every violated constraint, empty when valid.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        match *self {
            ClassifierKind::NaiveBayes => {}
            ClassifierKind::C45 {
                min_leaf,
                confidence,
                ..
            } => {
                if min_leaf < 1 {
                    out.push(format!("c45.min_leaf must be >= 1 (got {min_leaf})"));
                }
                if !(confidence > 0.0 && confidence <= 1.0) {
                    out.push(format!("c45.confidence must be in (0, 1] (got {confidence})"));
                }
            }
            ClassifierKind::Svm {
                penalty,
                degree,
                tol,
            } => {
                if !(penalty > 0.0 && penalty.is_finite()) {
                    out.push(format!("svm.penalty must be > 0 (got {penalty})"));
                }
                if degree < 1 {
                    out.push(format!("svm.degree must be >= 1 (got {degree})"));
                }
                if !(tol > 0.0 && tol.is_finite()) {
                    out.push(format!("svm.tol must be > 0 (got {tol})"));
                }
            }
            ClassifierKind::Mlp {
                hidden,
                learning_rate,
                epochs,
            } => {
                if hidden == Some(0) {
                    out.push("mlp.hidden must be >= 1 (got 0)".to_string());
                }
                if !(learning_rate > 0.0 && learning_rate.is_finite()) {
                    out.push(format!("mlp.learning_rate must be > 0 (got {learning_rate})"));
                }
                if epochs < 1 {
                    out.push(format!("mlp.epochs must be >= 1 (got {epochs})"));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }
}

/// Anything that labels instances.
pub trait Predictor {
    fn predict(&self, instance: &Instance) -> Result<Label>;

    fn predict_all(&self, d: &Dataset) -> Result<Vec<Label>> {
        d.instances().iter().map(|i| self.predict(i)).collect()
    }
}

/// Feature kinds a model was trained on; used to reject mismatched inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputSpec {
    kinds: Vec<FeatureKind>,
}

impl InputSpec {
    pub fn of(d: &Dataset) -> Self {
        Self {
            kinds: d.schema().features().iter().map(|f| f.kind).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    /// Dense values of `instance`, or a schema-mismatch error.
    pub fn check(&self, instance: &Instance) -> Result<Vec<f64>> {
        if instance.values.len() != self.kinds.len() {
            return Err(Error::SchemaMismatch(format!(
                "{} values, model expects {}",
                instance.values.len(),
                self.kinds.len()
            )));
        }
        instance
            .values
            .iter()
            .zip(&self.kinds)
            .enumerate()
            .map(|(f, (cell, kind))| {
                let v = cell.ok_or_else(|| {
                    Error::SchemaMismatch(format!("feature {f} is missing"))
                })?;
                if !v.is_finite() {
                    return Err(Error::SchemaMismatch(format!("feature {f} is not finite")));
                }
                if let FeatureKind::Categorical { arity } = kind {
                    if v.fract() != 0.0 || v < 0.0 || v >= *arity as f64 {
                        return Err(Error::SchemaMismatch(format!(
                            "feature {f} value {v} outside [0, {arity})"
                        )));
                    }
                }
                Ok(v)
            })
            .collect()
    }
}

/// Per-feature min/max scaling to [0, 1], fitted on training rows only.
/// Test values outside the training range are clamped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let n = rows.first().map_or(0, Vec::len);
        let mut min = vec![f64::INFINITY; n];
        let mut max = vec![f64::NEG_INFINITY; n];
        for row in rows {
            for (f, &v) in row.iter().enumerate() {
                min[f] = min[f].min(v);
                max[f] = max[f].max(v);
            }
        }
        Self { min, max }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(f, &v)| {
                let span = self.max[f] - self.min[f];
                if span > 0.0 {
                    ((v - self.min[f]) / span).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// A fitted classifier of any kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum TrainedModel {
    NaiveBayes(NaiveBayesModel),
    C45(C45Model),
    Svm(SvmModel),
    Mlp(MlpModel),
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelDocument<M> {
    version: u32,
    model: M,
}

impl TrainedModel {
    /// Version-tagged JSON: `{"version": 1, "model": {"kind": ..., "params": {...}}}`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelDocument {
            version: MODEL_FORMAT_VERSION,
            model: self,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument<TrainedModel> = serde_json::from_str(text)?;
        if doc.version != MODEL_FORMAT_VERSION {
            return Err(Error::Schema(format!(
                "unsupported model format version {}",
                doc.version
            )));
        }
        Ok(doc.model)
    }
}

impl Predictor for TrainedModel {
    fn predict(&self, instance: &Instance) -> Result<Label> {
        match self {
            TrainedModel::NaiveBayes(m) => m.predict(instance),
            TrainedModel::C45(m) => m.predict(instance),
            TrainedModel::Svm(m) => m.predict(instance),
            TrainedModel::Mlp(m) => m.predict(instance),
        }
    }
}

pub(crate) fn check_trainable(train: &Dataset) -> Result<()> {
    if train.has_missing() {
        return Err(Error::MissingValues);
    }
    let [neg, pos] = train.class_counts();
    if neg == 0 || pos == 0 {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Train `kind` on `train`. Deterministic in `(kind, train, seed)`.
pub fn fit(kind: &ClassifierKind, train: &Dataset, seed: u64) -> Result<TrainedModel> {
    kind.validate()?;
    check_trainable(train)?;
    Ok(match *kind {
        ClassifierKind::NaiveBayes => TrainedModel::NaiveBayes(NaiveBayesModel::fit(train)?),
        ClassifierKind::C45 {
            min_leaf,
            confidence,
            prune,
        } => {
            let tree = C45Model::grow(train, min_leaf)?;
            TrainedModel::C45(if prune {
                c45_prune(&tree, confidence)
            } else {
                tree
            })
        }
        ClassifierKind::Svm {
            penalty,
            degree,
            tol,
        } => TrainedModel::Svm(svm_fit_smo(train, penalty, degree, tol, seed)?),
        ClassifierKind::Mlp {
            hidden,
            learning_rate,
            epochs,
        } => {
            let hidden = hidden.unwrap_or_else(|| mlp::default_hidden(train.n_features()));
            TrainedModel::Mlp(mlp_fit_backprop(train, hidden, learning_rate, epochs, seed)?)
        }
    })
}

/// argmax over two scores, ties to negative.
pub(crate) fn argmax_label(negative: f64, positive: f64) -> Label {
    if positive > negative {
        Label::Positive
    } else {
        Label::Negative
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Feature, FeatureSchema};

    fn mixed() -> Dataset {
        let schema = FeatureSchema::new(
            vec![
                Feature {
                    name: "c".into(),
                    kind: FeatureKind::Categorical { arity: 2 },
                },
                Feature {
                    name: "v".into(),
                    kind: FeatureKind::Continuous,
                },
            ],
            "y",
        )
        .unwrap();
        let rows = (0..24)
            .map(|i| {
                let pos = i % 2 == 0;
                let label = if pos { Label::Positive } else { Label::Negative };
                let c = if i % 3 == 0 { 1.0 - pos as u8 as f64 } else { pos as u8 as f64 };
                Instance::complete(&[c, i as f64 * 0.1 + if pos { 2.0 } else { 0.0 }], label)
            })
            .collect();
        Dataset::new(schema, rows).unwrap()
    }

    /// Degenerate-case double: always answers with the single training label.
    struct Constant(Label);

    impl Predictor for Constant {
        fn predict(&self, _: &Instance) -> Result<Label> {
            Ok(self.0)
        }
    }

    #[test]
    fn single_class_training_is_rejected_and_double_answers_it() {
        let d = mixed();
        let negs: Vec<usize> = (0..d.len()).filter(|&i| d.instances()[i].label == Label::Negative).collect();
        let only_neg = d.subset(&negs);
        for kind in ClassifierKind::defaults() {
            assert!(matches!(fit(&kind, &only_neg, 0), Err(Error::SingleClass)));
        }
        let double = Constant(Label::Negative);
        assert!(double.predict_all(&only_neg).unwrap().iter().all(|&l| l == Label::Negative));
    }

    #[test]
    fn every_kind_fits_predicts_and_is_deterministic() {
        let d = mixed();
        for kind in ClassifierKind::defaults() {
            let a = fit(&kind, &d, 5).unwrap();
            let b = fit(&kind, &d, 5).unwrap();
            assert_eq!(a, b, "{kind:?}");
            assert_eq!(a.predict_all(&d).unwrap(), b.predict_all(&d).unwrap());
        }
    }

    #[test]
    fn schema_mismatch_is_an_error() {
        let d = mixed();
        for kind in ClassifierKind::defaults() {
            let model = fit(&kind, &d, 1).unwrap();
            let short = Instance::complete(&[1.0], Label::Negative);
            assert!(matches!(model.predict(&short), Err(Error::SchemaMismatch(_))));
            let bad_code = Instance::complete(&[5.0, 1.0], Label::Negative);
            assert!(matches!(model.predict(&bad_code), Err(Error::SchemaMismatch(_))));
            let missing = Instance::new(vec![Some(1.0), None], Label::Negative);
            assert!(model.predict(&missing).is_err());
        }
    }

    #[test]
    fn missing_training_cells_are_rejected() {
        let d = mixed();
        let mut rows = d.instances().to_vec();
        rows[0].values[1] = None;
        let d = Dataset::new(d.schema().clone(), rows).unwrap();
        assert!(matches!(fit(&ClassifierKind::NaiveBayes, &d, 0), Err(Error::MissingValues)));
    }

    #[test]
    fn model_json_round_trip_is_version_tagged() {
        let d = mixed();
        for kind in ClassifierKind::defaults() {
            let model = fit(&kind, &d, 2).unwrap();
            let json = model.to_json().unwrap();
            assert!(json.contains("\"version\": 1"));
            assert!(json.contains(&format!("\"kind\": \"{}\"", match kind {
                ClassifierKind::NaiveBayes => "naive_bayes",
                ClassifierKind::C45 { .. } => "c45",
                ClassifierKind::Svm { .. } => "svm",
                ClassifierKind::Mlp { .. } => "mlp",
            })));
            let back = TrainedModel::from_json(&json).unwrap();
            assert_eq!(back.predict_all(&d).unwrap(), model.predict_all(&d).unwrap());
        }
        assert!(TrainedModel::from_json(r#"{"version":9,"model":{"kind":"naive_bayes","params":{}}}"#).is_err());
    }

    #[test]
    fn kind_validation_lists_every_violation() {
        let bad = ClassifierKind::Mlp {
            hidden: Some(0),
            learning_rate: 0.0,
            epochs: 0,
        };
        assert_eq!(bad.violations().len(), 3);
        let bad = ClassifierKind::C45 {
            min_leaf: 0,
            confidence: 1.5,
            prune: true,
        };
        assert_eq!(bad.violations().len(), 2);
        assert!(ClassifierKind::svm().validate().is_ok());
        let bad = ClassifierKind::Svm {
            penalty: -1.0,
            degree: 0,
            tol: 0.0,
        };
        assert_eq!(bad.violations().len(), 3);
    }

    #[test]
    fn scaler_clamps_and_handles_constants() {
        let s = MinMaxScaler::fit(&[vec![0.0, 5.0], vec![10.0, 5.0]]);
        assert_eq!(s.transform(&[5.0, 5.0]), vec![0.5, 0.0]);
        assert_eq!(s.transform(&[20.0, 1.0]), vec![1.0, 0.0]);
        assert_eq!(s.transform(&[-3.0, 9.0]), vec![0.0, 0.0]);
    }
}
