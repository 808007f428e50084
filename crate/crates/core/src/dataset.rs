//! Tabular binary-classification data: schema, instances, masks and folds.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Continuous,
    Categorical { arity: u32 },
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureKind::Continuous => f.write_str("continuous"),
            FeatureKind::Categorical { arity } => write!(f, "categorical({arity})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub kind: FeatureKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    features: Vec<Feature>,
    class_name: String,
}

impl FeatureSchema {
    pub fn new(features: Vec<Feature>, class_name: impl Into<String>) -> Result<Self> {
        let class_name = class_name.into();
        if class_name.trim().is_empty() {
            return Err(Error::Schema("empty class name".into()));
        }
        let mut seen = HashSet::new();
        for feature in &features {
            if feature.name.trim().is_empty() {
                return Err(Error::Schema("empty feature name".into()));
            }
            if feature.name.contains([',', ':', '\n']) {
                return Err(Error::Schema(format!(
                    "feature name `{}` contains a reserved character",
                    feature.name
                )));
            }
            if !seen.insert(feature.name.as_str()) {
                return Err(Error::Schema(format!("duplicate feature `{}`", feature.name)));
            }
            if let FeatureKind::Categorical { arity } = feature.kind {
                if arity < 2 {
                    return Err(Error::Schema(format!(
                        "feature `{}` has arity {arity} < 2",
                        feature.name
                    )));
                }
            }
        }
        Ok(Self {
            features,
            class_name,
        })
    }

    /// The 13 Cleveland predictors, ordered cp first as in the published
    /// feature table, followed by the UCI column order for the rest.
    pub fn cleveland() -> Self {
        let features = CLEVELAND_COLUMNS
            .iter()
            .map(|c| Feature {
                name: c.name.to_string(),
                kind: c.kind,
            })
            .collect();
        Self::new(features, "num").expect("static schema is valid")
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn class_name(&self) -> &str {
        &self.class_name
    }

    pub fn names(&self) -> Vec<&str> {
        self.features.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn kind(&self, feature: usize) -> FeatureKind {
        self.features[feature].kind
    }

    /// Sidecar schema text.
    ///
    /// ```text
    /// # wrapsel schema v1
    /// class: num
    /// cp: categorical(4)
    /// age: continuous
    /// ```
    ///
    /// One `name: kind` line per feature in column order; `class:` names the
    /// label column; `#` starts a comment line.
    pub fn to_sidecar(&self) -> String {
        let mut out = String::from("# wrapsel schema v1\n");
        out.push_str(&format!("class: {}\n", self.class_name));
        for feature in &self.features {
            out.push_str(&format!("{}: {}\n", feature.name, feature.kind));
        }
        out
    }

    pub fn parse_sidecar(text: &str) -> Result<Self> {
        let mut class_name = None;
        let mut features = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| parse_err(format!("expected `key: value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "class" {
                class_name = Some(value.to_string());
                continue;
            }
            let kind = if value == "continuous" {
                FeatureKind::Continuous
            } else if let Some(arity) = value
                .strip_prefix("categorical(")
                .and_then(|v| v.strip_suffix(')'))
            {
                let arity = arity
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(format!("bad arity `{arity}`")))?;
                FeatureKind::Categorical { arity }
            } else {
                return Err(parse_err(format!("unknown feature kind `{value}`")));
            };
            features.push(Feature {
                name: key.to_string(),
                kind,
            });
        }
        let class_name = class_name.ok_or_else(|| Error::Schema("missing `class:` line".into()))?;
        Self::new(features, class_name)
    }
}

struct ClevelandColumn {
    name: &'static str,
    /// Position in the 14-field UCI line.
    uci_column: usize,
    kind: FeatureKind,
    /// Raw UCI codes in the order they map to 0, 1, 2, ...
    codes: &'static [f64],
}

const fn continuous(name: &'static str, uci_column: usize) -> ClevelandColumn {
    ClevelandColumn {
        name,
        uci_column,
        kind: FeatureKind::Continuous,
        codes: &[],
    }
}

const fn categorical(name: &'static str, uci_column: usize, codes: &'static [f64]) -> ClevelandColumn {
    ClevelandColumn {
        name,
        uci_column,
        kind: FeatureKind::Categorical {
            arity: codes.len() as u32,
        },
        codes,
    }
}

const CLEVELAND_COLUMNS: [ClevelandColumn; 13] = [
    categorical("cp", 2, &[1.0, 2.0, 3.0, 4.0]),
    continuous("age", 0),
    categorical("sex", 1, &[0.0, 1.0]),
    continuous("restbps", 3),
    continuous("chol", 4),
    categorical("fbs", 5, &[0.0, 1.0]),
    categorical("restecg", 6, &[0.0, 1.0, 2.0]),
    continuous("thalach", 7),
    categorical("exang", 8, &[0.0, 1.0]),
    continuous("oldpeak", 9),
    categorical("slope", 10, &[1.0, 2.0, 3.0]),
    categorical("ca", 11, &[0.0, 1.0, 2.0, 3.0]),
    categorical("thal", 12, &[3.0, 6.0, 7.0]),
];

const UCI_FIELDS: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn flip(self) -> Self {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }

    /// 0 for negative, 1 for positive.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Self {
        if index == 0 {
            Label::Negative
        } else {
            Label::Positive
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Negative => "negative",
            Label::Positive => "positive",
        }
    }
}

pub type Cell = Option<f64>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub values: Vec<Cell>,
    pub label: Label,
}

impl Instance {
    pub fn new(values: Vec<Cell>, label: Label) -> Self {
        Self { values, label }
    }

    pub fn complete(values: &[f64], label: Label) -> Self {
        Self {
            values: values.iter().copied().map(Some).collect(),
            label,
        }
    }

    pub fn has_missing(&self) -> bool {
        self.values.iter().any(Option::is_none)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    schema: FeatureSchema,
    instances: Vec<Instance>,
}

impl Dataset {
    pub fn new(schema: FeatureSchema, instances: Vec<Instance>) -> Result<Self> {
        for (row, instance) in instances.iter().enumerate() {
            validate_instance(&schema, instance).map_err(|e| e.context(format!("row {row}")))?;
        }
        Ok(Self { schema, instances })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.instances.iter().map(|i| i.label).collect()
    }

    /// (negative, positive) counts.
    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0; 2];
        for instance in &self.instances {
            counts[instance.label.index()] += 1;
        }
        counts
    }

    pub fn has_missing(&self) -> bool {
        self.instances.iter().any(Instance::has_missing)
    }

    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            instances: rows.iter().map(|&r| self.instances[r].clone()).collect(),
        }
    }

    pub fn with_labels(&self, labels: &[Label]) -> Dataset {
        assert_eq!(labels.len(), self.len());
        let mut out = self.clone();
        for (instance, &label) in out.instances.iter_mut().zip(labels) {
            instance.label = label;
        }
        out
    }

    /// Dense row-major feature matrix. Errors if any cell is missing.
    pub fn dense(&self) -> Result<Vec<Vec<f64>>> {
        self.instances
            .iter()
            .map(|i| {
                i.values
                    .iter()
                    .map(|c| c.ok_or(Error::MissingValues))
                    .collect()
            })
            .collect()
    }

    /// Canonical CSV: header of feature names plus the class column, one row
    /// per instance, `?` for missing cells and 0/1 for the label.
    pub fn to_csv(&self) -> String {
        let mut out = self.schema.names().join(",");
        out.push(',');
        out.push_str(&self.schema.class_name);
        out.push('\n');
        for instance in &self.instances {
            for cell in &instance.values {
                match cell {
                    Some(v) => out.push_str(&v.to_string()),
                    None => out.push('?'),
                }
                out.push(',');
            }
            out.push_str(&instance.label.index().to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str, schema: FeatureSchema) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::EmptyInput)?;
        let mut expected: Vec<&str> = schema.names();
        expected.push(schema.class_name());
        let got: Vec<&str> = header.split(',').map(str::trim).collect();
        if got != expected {
            return Err(Error::Parse {
                line: 1,
                message: format!("header {got:?} does not match schema {expected:?}"),
            });
        }
        let mut instances = Vec::new();
        for (i, line) in lines {
            let line_no = i + 1;
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != schema.len() + 1 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected {} fields, got {}", schema.len() + 1, fields.len()),
                });
            }
            let values = fields[..schema.len()]
                .iter()
                .map(|t| parse_cell(t, line_no))
                .collect::<Result<Vec<_>>>()?;
            let label = match fields[schema.len()] {
                "0" => Label::Negative,
                "1" => Label::Positive,
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("bad label `{other}`"),
                    })
                }
            };
            let instance = Instance::new(values, label);
            validate_instance(&schema, &instance).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            instances.push(instance);
        }
        if instances.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Self { schema, instances })
    }

    /// SHA-256 over the canonical CSV and schema sidecar, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.schema.to_sidecar().as_bytes());
        hasher.update(self.to_csv().as_bytes());
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn summary(&self) -> DatasetSummary {
        let missing_per_feature = (0..self.n_features())
            .map(|f| {
                self.instances
                    .iter()
                    .filter(|i| i.values[f].is_none())
                    .count()
            })
            .collect();
        DatasetSummary {
            instances: self.len(),
            rows_with_missing: self.instances.iter().filter(|i| i.has_missing()).count(),
            feature_names: self.schema.names().iter().map(|s| s.to_string()).collect(),
            missing_per_feature,
            class_counts: self.class_counts(),
        }
    }
}

fn parse_cell(token: &str, line: usize) -> Result<Cell> {
    if token == "?" {
        return Ok(None);
    }
    let value: f64 = token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("unparsable token `{token}`"),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite value `{token}`"),
        });
    }
    Ok(Some(value))
}

fn validate_instance(schema: &FeatureSchema, instance: &Instance) -> Result<()> {
    if instance.values.len() != schema.len() {
        return Err(Error::Schema(format!(
            "{} values for {} features",
            instance.values.len(),
            schema.len()
        )));
    }
    for (feature, cell) in schema.features.iter().zip(&instance.values) {
        let Some(v) = cell else { continue };
        if !v.is_finite() {
            return Err(Error::Schema(format!("non-finite value in `{}`", feature.name)));
        }
        if let FeatureKind::Categorical { arity } = feature.kind {
            if v.fract() != 0.0 || *v < 0.0 || *v >= arity as f64 {
                return Err(Error::Schema(format!(
                    "`{}` value {v} outside [0, {arity})",
                    feature.name
                )));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub instances: usize,
    pub rows_with_missing: usize,
    pub feature_names: Vec<String>,
    pub missing_per_feature: Vec<usize>,
    /// (negative, positive)
    pub class_counts: [usize; 2],
}

impl fmt::Display for DatasetSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} instances, {} with missing values",
            self.instances, self.rows_with_missing
        )?;
        writeln!(
            f,
            "class balance: {} negative, {} positive",
            self.class_counts[0], self.class_counts[1]
        )?;
        for (name, missing) in self.feature_names.iter().zip(&self.missing_per_feature) {
            if *missing > 0 {
                writeln!(f, "missing {name}: {missing}")?;
            }
        }
        Ok(())
    }
}

/// Parse the UCI `processed.cleveland.data` format: 13 predictors followed by
/// `num` per line, `?` for missing. `num > 0` is a positive diagnosis.
/// Categorical codes are re-mapped to `0..arity`.
pub fn parse_uci_cleveland(text: &str) -> Result<Dataset> {
    let schema = FeatureSchema::cleveland();
    let mut instances = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let line_no = i + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != UCI_FIELDS {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {UCI_FIELDS} fields, got {}", fields.len()),
            });
        }
        let mut values = Vec::with_capacity(CLEVELAND_COLUMNS.len());
        for column in &CLEVELAND_COLUMNS {
            let cell = parse_cell(fields[column.uci_column], line_no)?;
            let cell = match (cell, column.kind) {
                (Some(raw), FeatureKind::Categorical { .. }) => {
                    let code = column.codes.iter().position(|&c| c == raw).ok_or_else(|| {
                        Error::Parse {
                            line: line_no,
                            message: format!("`{}` has unknown code {raw}", column.name),
                        }
                    })?;
                    Some(code as f64)
                }
                (cell, _) => cell,
            };
            values.push(cell);
        }
        let num = match parse_cell(fields[UCI_FIELDS - 1], line_no)? {
            Some(v) => v,
            None => {
                return Err(Error::Parse {
                    line: line_no,
                    message: "missing class value".into(),
                })
            }
        };
        let label = if num > 0.0 {
            Label::Positive
        } else {
            Label::Negative
        };
        instances.push(Instance::new(values, label));
    }
    if instances.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(Dataset { schema, instances })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Imputation {
    /// Modal value for categorical features, mean for continuous ones.
    #[default]
    ModeMean,
    DropRows,
}

/// Per-feature fill values learned from one dataset and applied to another.
#[derive(Clone, Debug, PartialEq)]
pub struct ImputationStats {
    fill: Vec<f64>,
}

impl ImputationStats {
    pub fn fit(d: &Dataset) -> Result<Self> {
        let fill = d
            .schema
            .features
            .iter()
            .enumerate()
            .map(|(f, feature)| {
                let observed = d.instances.iter().filter_map(|i| i.values[f]);
                match feature.kind {
                    FeatureKind::Continuous => {
                        let (sum, n) = observed.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
                        (n > 0)
                            .then(|| sum / n as f64)
                            .ok_or_else(|| Error::AllMissing(feature.name.clone()))
                    }
                    FeatureKind::Categorical { .. } => {
                        let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
                        for v in observed {
                            *counts.entry(v as i64).or_default() += 1;
                        }
                        // smallest code wins ties
                        counts
                            .iter()
                            .rev()
                            .max_by_key(|(_, &c)| c)
                            .map(|(&v, _)| v as f64)
                            .ok_or_else(|| Error::AllMissing(feature.name.clone()))
                    }
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self { fill })
    }

    pub fn apply(&self, d: &Dataset) -> Dataset {
        assert_eq!(self.fill.len(), d.n_features());
        let instances = d
            .instances
            .iter()
            .map(|i| Instance {
                values: i
                    .values
                    .iter()
                    .zip(&self.fill)
                    .map(|(c, &fill)| Some(c.unwrap_or(fill)))
                    .collect(),
                label: i.label,
            })
            .collect();
        Dataset {
            schema: d.schema.clone(),
            instances,
        }
    }
}

pub fn impute_missing(d: &Dataset, strategy: Imputation) -> Result<Dataset> {
    match strategy {
        Imputation::ModeMean => Ok(ImputationStats::fit(d)?.apply(d)),
        Imputation::DropRows => {
            let instances: Vec<Instance> = d
                .instances
                .iter()
                .filter(|i| !i.has_missing())
                .cloned()
                .collect();
            if instances.is_empty() && !d.is_empty() {
                return Err(Error::EmptyInput.context("every row has a missing cell"));
            }
            Ok(Dataset {
                schema: d.schema.clone(),
                instances,
            })
        }
    }
}

/// Fixed-length feature selection bit vector.
///
/// Serialized as a string of `0`/`1` characters, feature 0 first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureMask {
    bits: Vec<bool>,
}

impl FeatureMask {
    pub fn zeros(len: usize) -> Self {
        Self {
            bits: vec![false; len],
        }
    }

    pub fn ones(len: usize) -> Self {
        Self {
            bits: vec![true; len],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut mask = Self::zeros(len);
        for &i in indices {
            mask.bits[i] = true;
        }
        mask
    }

    pub fn parse(bits: &str) -> Result<Self> {
        bits.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Config(vec![format!(
                    "mask `{bits}` contains `{other}`"
                )])),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::from_bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] = !self.bits[i];
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn none_selected(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn selected(&self) -> Vec<usize> {
        (0..self.bits.len()).filter(|&i| self.bits[i]).collect()
    }

    pub fn and(&self, other: &FeatureMask) -> FeatureMask {
        assert_eq!(self.len(), other.len());
        FeatureMask::from_bits(self.bits.iter().zip(&other.bits).map(|(a, b)| *a && *b).collect())
    }

    /// Bits of `self` at the positions selected by `outer`, i.e. this mask
    /// expressed in the coordinates of `project(d, outer)`.
    pub fn restrict(&self, outer: &FeatureMask) -> FeatureMask {
        assert_eq!(self.len(), outer.len());
        FeatureMask::from_bits(outer.selected().into_iter().map(|i| self.bits[i]).collect())
    }

    pub fn selected_names<'a>(&self, schema: &'a FeatureSchema) -> Vec<&'a str> {
        self.selected()
            .into_iter()
            .map(|i| schema.features[i].name.as_str())
            .collect()
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for FeatureMask {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FeatureMask {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        FeatureMask::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Keep only the features selected by `m`, in their original order.
pub fn project(d: &Dataset, m: &FeatureMask) -> Result<Dataset> {
    if m.len() != d.n_features() {
        return Err(Error::MaskLength {
            expected: d.n_features(),
            got: m.len(),
        });
    }
    if m.none_selected() {
        return Err(Error::EmptyMask);
    }
    let keep = m.selected();
    let features = keep.iter().map(|&i| d.schema.features[i].clone()).collect();
    let schema = FeatureSchema {
        features,
        class_name: d.schema.class_name.clone(),
    };
    let instances = d
        .instances
        .iter()
        .map(|inst| Instance {
            values: keep.iter().map(|&i| inst.values[i]).collect(),
            label: inst.label,
        })
        .collect();
    Ok(Dataset { schema, instances })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    fold_of: Vec<usize>,
    k: usize,
    seed: u64,
}

impl FoldAssignment {
    pub fn fold_of(&self) -> &[usize] {
        &self.fold_of
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified k-fold assignment.
///
/// Each class's indices are shuffled with a ChaCha8 stream seeded from `seed`
/// (negatives first, then positives) and dealt round-robin; the positive deal
/// continues where the negative one stopped so overall fold sizes stay within
/// one of each other.
pub fn stratified_folds(d: &Dataset, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::Config(vec![format!("fold count {k} < 2")]));
    }
    let mut rng = rng_from_seed(seed);
    let mut fold_of = vec![0; d.len()];
    let mut next = 0;
    for label in [Label::Negative, Label::Positive] {
        let mut members: Vec<usize> = (0..d.len())
            .filter(|&i| d.instances[i].label == label)
            .collect();
        if members.len() < k {
            return Err(Error::TooFewPerClass {
                class: label.name(),
                count: members.len(),
                folds: k,
            });
        }
        members.shuffle(&mut rng);
        for i in members {
            fold_of[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldAssignment { fold_of, k, seed })
}

/// Class-blind k-fold assignment: one shuffle, dealt round-robin.
pub fn shuffled_folds(n: usize, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 || n < k {
        return Err(Error::Config(vec![format!("cannot split {n} rows into {k} folds")]));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(seed));
    let mut fold_of = vec![0; n];
    for (pos, i) in order.into_iter().enumerate() {
        fold_of[i] = pos % k;
    }
    Ok(FoldAssignment { fold_of, k, seed })
}
