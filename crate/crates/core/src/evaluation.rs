//! Outer cross-validation around a wrapper + classifier pair, confusion
//! matrix metrics, and the wrapper × classifier comparison grid.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{fit, ClassifierKind, Predictor};
use crate::dataset::{
    impute_missing, project, shuffled_folds, stratified_folds, Dataset, FeatureMask, FoldAssignment,
    Imputation, ImputationStats, Label,
};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream};
use crate::wrappers::{bfs_select, ga_select, sffs_select, GaConfig, SearchBudget, SffsConfig, WrapperResult, DEFAULT_FITNESS_FOLDS};

/// Counts with positive = disease present.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

impl std::ops::Add for ConfusionMatrix {
    type Output = ConfusionMatrix;

    fn add(self, o: ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
        }
    }
}

pub fn confusion(predictions: &[Label], truth: &[Label]) -> Result<ConfusionMatrix> {
    if predictions.len() != truth.len() {
        return Err(Error::LengthMismatch {
            predictions: predictions.len(),
            truth: truth.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (p, t) in predictions.iter().zip(truth) {
        match (p, t) {
            (Label::Positive, Label::Positive) => cm.tp += 1,
            (Label::Positive, Label::Negative) => cm.fp += 1,
            (Label::Negative, Label::Positive) => cm.fn_ += 1,
            (Label::Negative, Label::Negative) => cm.tn += 1,
        }
    }
    Ok(cm)
}

/// (TN + TP) / (TN + TP + FN + FP)
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyConfusion);
    }
    Ok((cm.tn + cm.tp) as f64 / total as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WrapperChoice {
    Ga,
    Bfs,
    Sffs,
    None,
}

impl WrapperChoice {
    pub const ALL: [WrapperChoice; 4] = [
        WrapperChoice::Ga,
        WrapperChoice::Bfs,
        WrapperChoice::Sffs,
        WrapperChoice::None,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            WrapperChoice::Ga => "ga",
            WrapperChoice::Bfs => "bfs",
            WrapperChoice::Sffs => "sffs",
            WrapperChoice::None => "none",
        }
    }

    /// Row heading used in the comparison table.
    pub fn label(self) -> &'static str {
        match self {
            WrapperChoice::Ga => "GA wrapper",
            WrapperChoice::Bfs => "BFS wrapper",
            WrapperChoice::Sffs => "SFFS wrapper",
            WrapperChoice::None => "Without FS",
        }
    }
}

impl FromStr for WrapperChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ga" => Ok(WrapperChoice::Ga),
            "bfs" => Ok(WrapperChoice::Bfs),
            "sffs" => Ok(WrapperChoice::Sffs),
            "none" => Ok(WrapperChoice::None),
            other => Err(format!("unknown wrapper `{other}` (expected ga|bfs|sffs|none)")),
        }
    }
}

/// Outer-loop settings shared by every cell of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub stratified: bool,
    pub imputation: Imputation,
    pub fitness_folds: usize,
    /// GA parameters; `seed` and `fitness_folds` are replaced per fold.
    pub ga: GaConfig,
    /// BFS stop rule; its evaluation cap also bounds SFFS.
    pub budget: SearchBudget,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            stratified: true,
            imputation: Imputation::ModeMean,
            fitness_folds: DEFAULT_FITNESS_FOLDS,
            ga: GaConfig::default(),
            budget: SearchBudget::default(),
        }
    }
}

impl CvConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.folds < 2 {
            out.push(format!("folds must be >= 2 (got {})", self.folds));
        }
        if self.fitness_folds < 2 {
            out.push(format!("fitness_folds must be >= 2 (got {})", self.fitness_folds));
        }
        let ga = GaConfig {
            fitness_folds: self.fitness_folds,
            ..self.ga.clone()
        };
        out.extend(ga.violations().into_iter().filter(|v| !v.contains("fitness_folds")));
        out.extend(self.budget.violations());
        out
    }
}

/// Run one wrapper on `train`. `None` for [`WrapperChoice::None`].
pub fn run_wrapper(
    wrapper: WrapperChoice,
    train: &Dataset,
    kind: &ClassifierKind,
    cfg: &CvConfig,
    seed: u64,
) -> Result<Option<WrapperResult>> {
    Ok(match wrapper {
        WrapperChoice::Ga => Some(ga_select(
            train,
            kind,
            &GaConfig {
                seed,
                fitness_folds: cfg.fitness_folds,
                ..cfg.ga.clone()
            },
        )?),
        WrapperChoice::Bfs => Some(bfs_select(train, kind, &cfg.budget, cfg.fitness_folds, seed)?),
        WrapperChoice::Sffs => Some(sffs_select(
            train,
            kind,
            &SffsConfig {
                fitness_folds: cfg.fitness_folds,
                max_subset_evaluations: cfg.budget.max_subset_evaluations,
                seed,
            },
        )?),
        WrapperChoice::None => None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub mask: FeatureMask,
    pub selected_features: Vec<String>,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    /// Internal CV fitness of the selected mask, when a wrapper ran.
    pub wrapper_fitness: Option<f64>,
    pub wrapper_evaluations: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub wrapper: WrapperChoice,
    pub classifier: ClassifierKind,
    pub seed: u64,
    pub config: CvConfig,
    pub dataset_fingerprint: String,
    pub per_fold: Vec<FoldResult>,
    pub mean_accuracy: f64,
    /// Sample standard deviation across folds.
    pub std_accuracy: f64,
    /// Most frequent per-fold mask; ties go to the smaller bit string.
    pub modal_mask: FeatureMask,
}

impl CvReport {
    pub fn pooled_confusion(&self) -> ConfusionMatrix {
        self.per_fold
            .iter()
            .fold(ConfusionMatrix::default(), |acc, f| acc + f.confusion)
    }
}

pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Outer `cfg.folds`-fold cross-validation. Folds come from
/// `derive_seed(seed, [OUTER_FOLDS])`.
pub fn outer_cv(
    d: &Dataset,
    wrapper: WrapperChoice,
    kind: &ClassifierKind,
    cfg: &CvConfig,
    seed: u64,
) -> Result<CvReport> {
    let problems: Vec<String> = cfg.violations().into_iter().chain(kind.violations()).collect();
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    let data = match cfg.imputation {
        Imputation::DropRows => impute_missing(d, Imputation::DropRows)?,
        Imputation::ModeMean => d.clone(),
    };
    let fold_seed = derive_seed(seed, &[stream::OUTER_FOLDS]);
    let folds = if cfg.stratified {
        stratified_folds(&data, cfg.folds, fold_seed)?
    } else {
        shuffled_folds(data.len(), cfg.folds, fold_seed)?
    };
    outer_cv_with_folds(&data, &folds, wrapper, kind, cfg, seed)
}

/// Outer cross-validation over a given fold assignment. For every fold the
/// wrapper, imputation statistics, scaling statistics and final model see
/// only the training folds.
pub fn outer_cv_with_folds(
    d: &Dataset,
    folds: &FoldAssignment,
    wrapper: WrapperChoice,
    kind: &ClassifierKind,
    cfg: &CvConfig,
    seed: u64,
) -> Result<CvReport> {
    if folds.fold_of().len() != d.len() {
        return Err(Error::Config(vec!["fold assignment does not match dataset".into()]));
    }
    let per_fold = (0..folds.k())
        .into_par_iter()
        .map(|fold| {
            run_fold(d, folds, fold, wrapper, kind, cfg, seed)
                .map_err(|e| e.context(format!("outer fold {fold}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let accuracies: Vec<f64> = per_fold.iter().map(|f| f.accuracy).collect();
    let (mean_accuracy, std_accuracy) = mean_std(&accuracies);
    let mut tally: BTreeMap<&FeatureMask, usize> = BTreeMap::new();
    for f in &per_fold {
        *tally.entry(&f.mask).or_default() += 1;
    }
    let modal_mask = tally
        .iter()
        .rev()
        .max_by_key(|(_, &c)| c)
        .map(|(m, _)| (*m).clone())
        .expect("at least two folds");
    Ok(CvReport {
        wrapper,
        classifier: kind.clone(),
        seed,
        config: cfg.clone(),
        dataset_fingerprint: d.fingerprint(),
        per_fold,
        mean_accuracy,
        std_accuracy,
        modal_mask,
    })
}

fn run_fold(
    d: &Dataset,
    folds: &FoldAssignment,
    fold: usize,
    wrapper: WrapperChoice,
    kind: &ClassifierKind,
    cfg: &CvConfig,
    seed: u64,
) -> Result<FoldResult> {
    let train_raw = d.subset(&folds.train_indices(fold));
    let test_raw = d.subset(&folds.test_indices(fold));
    let stats = ImputationStats::fit(&train_raw)?;
    let train = stats.apply(&train_raw);
    let test = stats.apply(&test_raw);

    let wrapper_seed = derive_seed(seed, &[stream::WRAPPER, fold as u64]);
    let selection = run_wrapper(wrapper, &train, kind, cfg, wrapper_seed)?;
    let mask = selection
        .as_ref()
        .map_or_else(|| FeatureMask::ones(d.n_features()), |r| r.best_mask.clone());

    let model = fit(
        kind,
        &project(&train, &mask)?,
        derive_seed(seed, &[stream::FIT, fold as u64]),
    )?;
    let test = project(&test, &mask)?;
    let cm = confusion(&model.predict_all(&test)?, &test.labels())?;
    Ok(FoldResult {
        fold,
        selected_features: mask
            .selected_names(d.schema())
            .into_iter()
            .map(String::from)
            .collect(),
        mask,
        confusion: cm,
        accuracy: accuracy(&cm)?,
        wrapper_fitness: selection.as_ref().map(|r| r.best_fitness),
        wrapper_evaluations: selection.as_ref().map(|r| r.evaluations),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Cells to run, in any order; the table orders them by row then column.
    pub cells: Vec<(WrapperChoice, ClassifierKind)>,
    pub seeds: Vec<u64>,
    pub cv: CvConfig,
}

impl BenchConfig {
    /// Every wrapper × every default classifier.
    pub fn full_grid(seeds: Vec<u64>, cv: CvConfig) -> Self {
        Self::grid(&WrapperChoice::ALL, &ClassifierKind::defaults(), seeds, cv)
    }

    pub fn grid(
        wrappers: &[WrapperChoice],
        classifiers: &[ClassifierKind],
        seeds: Vec<u64>,
        cv: CvConfig,
    ) -> Self {
        let cells = wrappers
            .iter()
            .flat_map(|&w| classifiers.iter().map(move |k| (w, k.clone())))
            .collect();
        Self { cells, seeds, cv }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellOutcome {
    Ok {
        /// Mean over seeds of each seed's mean fold accuracy.
        mean_accuracy: f64,
        /// Sample standard deviation of the per-seed means.
        std_accuracy: f64,
        per_seed: Vec<CvReport>,
    },
    Failed {
        error: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchCell {
    pub wrapper: WrapperChoice,
    pub classifier: ClassifierKind,
    pub outcome: CellOutcome,
    /// Summed compute time of the cell's runs; not serialized.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl BenchCell {
    pub fn mean_accuracy(&self) -> Option<f64> {
        match &self.outcome {
            CellOutcome::Ok { mean_accuracy, .. } => Some(*mean_accuracy),
            CellOutcome::Failed { .. } => None,
        }
    }

    pub fn per_seed_means(&self) -> Vec<f64> {
        match &self.outcome {
            CellOutcome::Ok { per_seed, .. } => per_seed.iter().map(|r| r.mean_accuracy).collect(),
            CellOutcome::Failed { .. } => Vec::new(),
        }
    }

    pub fn failed(&self) -> bool {
        matches!(self.outcome, CellOutcome::Failed { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub seeds: Vec<u64>,
    pub config: CvConfig,
    pub dataset_fingerprint: String,
    pub cells: Vec<BenchCell>,
}

fn column_rank(kind: &ClassifierKind) -> usize {
    match kind {
        ClassifierKind::NaiveBayes => 0,
        ClassifierKind::Svm { .. } => 1,
        ClassifierKind::Mlp { .. } => 2,
        ClassifierKind::C45 { .. } => 3,
    }
}

/// Run every requested cell for every seed. Cells and seeds run in parallel;
/// a failing cell is recorded and the others still complete.
pub fn bench(d: &Dataset, cfg: &BenchConfig) -> BenchTable {
    let mut cells = cfg.cells.clone();
    cells.sort_by_key(|(w, k)| (*w, column_rank(k)));
    cells.dedup_by(|a, b| a.0 == b.0 && column_rank(&a.1) == column_rank(&b.1));

    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| cfg.seeds.iter().map(move |&s| (c, s)))
        .collect();
    let runs: Vec<(Result<CvReport>, Duration)> = jobs
        .par_iter()
        .map(|&(c, seed)| {
            let (wrapper, kind) = &cells[c];
            let start = Instant::now();
            let report = outer_cv(d, *wrapper, kind, &cfg.cv, seed);
            (report, start.elapsed())
        })
        .collect();

    let mut results = runs.into_iter();
    let cells = cells
        .into_iter()
        .map(|(wrapper, classifier)| {
            let mut per_seed = Vec::with_capacity(cfg.seeds.len());
            let mut error = None;
            let mut elapsed = Duration::ZERO;
            for &seed in &cfg.seeds {
                let (report, took) = results.next().expect("one run per (cell, seed)");
                elapsed += took;
                match report {
                    Ok(r) => per_seed.push(r),
                    Err(e) if error.is_none() => error = Some(format!("seed {seed}: {e}")),
                    Err(_) => {}
                }
            }
            let outcome = match error {
                Some(error) => CellOutcome::Failed { error },
                None => {
                    let means: Vec<f64> = per_seed.iter().map(|r| r.mean_accuracy).collect();
                    let (mean_accuracy, std_accuracy) = mean_std(&means);
                    CellOutcome::Ok {
                        mean_accuracy,
                        std_accuracy,
                        per_seed,
                    }
                }
            };
            BenchCell {
                wrapper,
                classifier,
                outcome,
                elapsed,
            }
        })
        .collect();
    BenchTable {
        seeds: cfg.seeds.clone(),
        config: cfg.cv.clone(),
        dataset_fingerprint: d.fingerprint(),
        cells,
    }
}

impl BenchTable {
    pub fn cell(&self, wrapper: WrapperChoice, classifier: &str) -> Option<&BenchCell> {
        self.cells
            .iter()
            .find(|c| c.wrapper == wrapper && c.classifier.short_name() == classifier)
    }

    pub fn any_failed(&self) -> bool {
        self.cells.iter().any(BenchCell::failed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Aligned text table: one row per wrapper, one column per classifier,
    /// accuracies in percent. Only rows and columns present in the run appear.
    pub fn to_table(&self) -> String {
        let mut rows: Vec<WrapperChoice> = self.cells.iter().map(|c| c.wrapper).collect();
        rows.dedup();
        let mut cols: Vec<&ClassifierKind> = Vec::new();
        for c in &self.cells {
            if !cols.iter().any(|k| column_rank(k) == column_rank(&c.classifier)) {
                cols.push(&c.classifier);
            }
        }
        cols.sort_by_key(|k| column_rank(k));

        let first_width = 20;
        let width = 9;
        let mut out = format!("{:<first_width$}", "Wrapper Algorithms");
        for k in &cols {
            let _ = write!(out, "{:>width$}", k.label());
        }
        out.push('\n');
        for w in rows {
            let _ = write!(out, "{:<first_width$}", w.label());
            for k in &cols {
                let cell = self
                    .cells
                    .iter()
                    .find(|c| c.wrapper == w && column_rank(&c.classifier) == column_rank(k));
                let text = match cell.map(|c| &c.outcome) {
                    Some(CellOutcome::Ok { mean_accuracy, .. }) => format!("{:.2}", mean_accuracy * 100.0),
                    Some(CellOutcome::Failed { .. }) => "FAILED".to_string(),
                    None => "-".to_string(),
                };
                let _ = write!(out, "{text:>width$}");
            }
            out.push('\n');
        }
        out
    }

    /// One line per (wrapper, classifier, seed, fold); failed cells get a
    /// single line with `status=failed`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("wrapper,classifier,seed,fold,status,accuracy,tp,fp,fn,tn,mask\n");
        for cell in &self.cells {
            let (w, k) = (cell.wrapper.short_name(), cell.classifier.short_name());
            match &cell.outcome {
                CellOutcome::Ok { per_seed, .. } => {
                    for report in per_seed {
                        for f in &report.per_fold {
                            let cm = f.confusion;
                            let _ = writeln!(
                                out,
                                "{w},{k},{},{},ok,{},{},{},{},{},{}",
                                report.seed, f.fold, f.accuracy, cm.tp, cm.fp, cm.fn_, cm.tn, f.mask
                            );
                        }
                    }
                }
                CellOutcome::Failed { .. } => {
                    let _ = writeln!(out, "{w},{k},,,failed,,,,,,");
                }
            }
        }
        out
    }
}
