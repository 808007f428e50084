//! Run settings: defaults, overlaid by an optional TOML file, overlaid by
//! command-line flags. Validation reports every problem at once.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use wrapsel_core::classifiers::{
    DEFAULT_C45_CONFIDENCE, DEFAULT_C45_MIN_LEAF, DEFAULT_MLP_EPOCHS, DEFAULT_MLP_LEARNING_RATE, DEFAULT_SVM_DEGREE,
    DEFAULT_SVM_PENALTY, DEFAULT_SVM_TOL,
};
use wrapsel_core::wrappers::{GaConfig, SearchBudget, DEFAULT_FITNESS_FOLDS};
use wrapsel_core::{ClassifierKind, CvConfig, Imputation, WrapperChoice};

use crate::CliError;

/// Settings shared by `select` and `bench`. Every field is optional so a
/// config file and flags can be layered; the same names (kebab-case) are
/// used as TOML keys.
#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    /// Dataset file: UCI `processed.cleveland.data` text, or a canonical CSV
    /// with a `.schema` sidecar. Relative paths also resolve against
    /// $WRAPSEL_DATA_DIR.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Missing-value strategy: mode-mean | drop
    #[arg(long)]
    pub impute: Option<String>,
    /// ga | bfs | sffs | none
    #[arg(long)]
    pub wrapper: Option<String>,
    /// nb | c45 | svm | mlp
    #[arg(long)]
    pub classifier: Option<String>,
    /// Outer cross-validation folds
    #[arg(long)]
    pub folds: Option<usize>,
    /// Stratify outer folds by class (true | false)
    #[arg(long)]
    pub stratified: Option<bool>,
    /// Internal folds used to score a feature subset
    #[arg(long)]
    pub fitness_folds: Option<usize>,
    /// Master seed (select)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated master seeds (bench)
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Comma-separated wrapper:classifier cells, `*` as wildcard (bench)
    #[arg(long, value_delimiter = ',')]
    pub cells: Option<Vec<String>>,
    /// json | csv | table
    #[arg(long)]
    pub format: Option<String>,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// GA population size (even)
    #[arg(long)]
    pub population: Option<usize>,
    /// GA generations
    #[arg(long)]
    pub generations: Option<usize>,
    /// GA crossover probability
    #[arg(long)]
    pub crossover_prob: Option<f64>,
    /// Per-gene mutation probability
    #[arg(long)]
    pub mutation_prob: Option<f64>,

    /// Best-first search: expansions without a new best before stopping
    #[arg(long)]
    pub bfs_stall: Option<usize>,
    /// Cap on distinct subsets scored by best-first search and SFFS
    #[arg(long)]
    pub max_evaluations: Option<usize>,

    /// C4.5 minimum instances per leaf (M)
    #[arg(long)]
    pub min_leaf: Option<usize>,
    /// C4.5 pruning confidence (C)
    #[arg(long)]
    pub confidence: Option<f64>,
    /// C4.5 pessimistic pruning on or off
    #[arg(long)]
    pub prune: Option<bool>,

    /// SVM penalty C
    #[arg(long)]
    pub penalty: Option<f64>,
    /// SVM polynomial kernel degree
    #[arg(long)]
    pub degree: Option<u32>,
    /// SVM stopping tolerance
    #[arg(long)]
    pub svm_tol: Option<f64>,

    /// MLP hidden units (default ⌈(inputs + 2) / 2⌉)
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
}

macro_rules! overlay {
    ($top:ident, $base:ident; $($field:ident),* $(,)?) => {
        Settings { $($field: $top.$field.or($base.$field)),* }
    };
}

impl Settings {
    /// `self` wins wherever it has a value.
    pub fn over(self, base: Settings) -> Settings {
        overlay!(self, base;
            dataset, impute, wrapper, classifier, folds, stratified, fitness_folds, seed, seeds,
            cells, format, out, population, generations, crossover_prob, mutation_prob, bfs_stall,
            max_evaluations, min_leaf, confidence, prune, penalty, degree, svm_tol, hidden,
            learning_rate, epochs)
    }

    pub fn from_file(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(vec![format!("config file {}: {e}", path.display())]))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Validation(vec![format!("config file {}: {e}", path.display())]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Select,
    Bench,
}

/// Hyperparameters of every classifier kind, as configured.
#[derive(Clone, Debug, Serialize)]
pub struct Classifiers {
    pub nb: ClassifierKind,
    pub c45: ClassifierKind,
    pub svm: ClassifierKind,
    pub mlp: ClassifierKind,
}

impl Classifiers {
    pub fn get(&self, name: &str) -> Option<&ClassifierKind> {
        match name {
            "nb" => Some(&self.nb),
            "c45" => Some(&self.c45),
            "svm" => Some(&self.svm),
            "mlp" => Some(&self.mlp),
            _ => None,
        }
    }

    pub fn columns(&self) -> [&ClassifierKind; 4] {
        [&self.nb, &self.svm, &self.mlp, &self.c45]
    }
}

/// Fully resolved settings; serialized into every report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub dataset: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wrapper: Option<WrapperChoice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classifier: Option<ClassifierKind>,
    pub seeds: Vec<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<String>,
    pub format: Format,
    pub cv: CvConfig,
    pub classifiers: Classifiers,
    #[serde(skip)]
    pub dataset_path: PathBuf,
    #[serde(skip)]
    pub grid: Vec<(WrapperChoice, ClassifierKind)>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub const DEFAULT_DATASET: &str = "processed.cleveland.data";
pub const DATA_DIR_ENV: &str = "WRAPSEL_DATA_DIR";
const DEFAULT_BENCH_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

pub fn parse_imputation(s: &str) -> Result<Imputation, String> {
    match s {
        "mode-mean" => Ok(Imputation::ModeMean),
        "drop" => Ok(Imputation::DropRows),
        other => Err(format!("impute: unknown strategy `{other}` (expected mode-mean|drop)")),
    }
}

fn parse_format(s: &str) -> Result<Format, String> {
    match s {
        "json" => Ok(Format::Json),
        "csv" => Ok(Format::Csv),
        "table" => Ok(Format::Table),
        other => Err(format!("format: unknown `{other}` (expected json|csv|table)")),
    }
}

/// Expand `wrapper:classifier` patterns, `*` matching anything, into grid
/// cells without duplicates.
fn parse_cells(
    specs: &[String],
    classifiers: &Classifiers,
    problems: &mut Vec<String>,
) -> Vec<(WrapperChoice, ClassifierKind)> {
    let mut grid = Vec::new();
    for spec in specs {
        let Some((w, c)) = spec.split_once(':') else {
            problems.push(format!("cells: `{spec}` is not wrapper:classifier"));
            continue;
        };
        let wrappers: Vec<WrapperChoice> = if w == "*" {
            WrapperChoice::ALL.to_vec()
        } else {
            match w.parse() {
                Ok(w) => vec![w],
                Err(e) => {
                    problems.push(format!("cells: {e}"));
                    continue;
                }
            }
        };
        let kinds: Vec<&ClassifierKind> = if c == "*" {
            classifiers.columns().to_vec()
        } else {
            match classifiers.get(c) {
                Some(k) => vec![k],
                None => {
                    problems.push(format!("cells: unknown classifier `{c}` (expected nb|c45|svm|mlp)"));
                    continue;
                }
            }
        };
        for w in wrappers {
            for k in &kinds {
                if !grid.iter().any(|(gw, gk): &(WrapperChoice, ClassifierKind)| *gw == w && gk == *k) {
                    grid.push((w, (*k).clone()));
                }
            }
        }
    }
    grid
}

/// Find the dataset file: the given path, the path under $WRAPSEL_DATA_DIR,
/// or the default file in that directory.
pub fn resolve_dataset(path: Option<&Path>) -> Result<PathBuf, CliError> {
    let data_dir = std::env::var_os(DATA_DIR_ENV).map(PathBuf::from);
    match (path, data_dir) {
        (Some(p), _) if p.exists() => Ok(p.to_path_buf()),
        (Some(p), Some(dir)) if p.is_relative() && dir.join(p).exists() => Ok(dir.join(p)),
        (Some(p), _) => Err(CliError::Data(format!("dataset {} not found", p.display()))),
        (None, Some(dir)) => {
            let p = dir.join(DEFAULT_DATASET);
            if p.exists() {
                Ok(p)
            } else {
                Err(CliError::Data(format!("dataset {} not found", p.display())))
            }
        }
        (None, None) => Err(CliError::Validation(vec![format!(
            "dataset: pass --dataset or set {DATA_DIR_ENV}"
        )])),
    }
}

fn check<T>(problems: &mut Vec<String>, r: Result<T, String>) -> Option<T> {
    r.map_err(|e| problems.push(e)).ok()
}

pub fn resolve(s: Settings, command: Command) -> Result<RunConfig, CliError> {
    let mut problems = Vec::new();

    let imputation = check(&mut problems, parse_imputation(s.impute.as_deref().unwrap_or("mode-mean"))).unwrap_or_default();
    let default_format = if command == Command::Bench { "table" } else { "json" };
    let format = check(&mut problems, parse_format(s.format.as_deref().unwrap_or(default_format))).unwrap_or(Format::Json);
    let wrapper = check(&mut problems, s.wrapper.as_deref().unwrap_or("ga").parse::<WrapperChoice>());

    let fitness_folds = s.fitness_folds.unwrap_or(DEFAULT_FITNESS_FOLDS);
    let ga_defaults = GaConfig::default();
    let budget_defaults = SearchBudget::default();
    let cv = CvConfig {
        folds: s.folds.unwrap_or(10),
        stratified: s.stratified.unwrap_or(true),
        imputation,
        fitness_folds,
        ga: GaConfig {
            population_size: s.population.unwrap_or(ga_defaults.population_size),
            generations: s.generations.unwrap_or(ga_defaults.generations),
            crossover_prob: s.crossover_prob.unwrap_or(ga_defaults.crossover_prob),
            mutation_prob: s.mutation_prob.unwrap_or(ga_defaults.mutation_prob),
            seed: 0,
            fitness_folds,
        },
        budget: SearchBudget {
            max_expansions_without_improvement: s
                .bfs_stall
                .unwrap_or(budget_defaults.max_expansions_without_improvement),
            max_subset_evaluations: s.max_evaluations.unwrap_or(budget_defaults.max_subset_evaluations),
        },
    };
    problems.extend(cv.violations());

    let classifiers = Classifiers {
        nb: ClassifierKind::NaiveBayes,
        c45: ClassifierKind::C45 {
            min_leaf: s.min_leaf.unwrap_or(DEFAULT_C45_MIN_LEAF),
            confidence: s.confidence.unwrap_or(DEFAULT_C45_CONFIDENCE),
            prune: s.prune.unwrap_or(true),
        },
        svm: ClassifierKind::Svm {
            penalty: s.penalty.unwrap_or(DEFAULT_SVM_PENALTY),
            degree: s.degree.unwrap_or(DEFAULT_SVM_DEGREE),
            tol: s.svm_tol.unwrap_or(DEFAULT_SVM_TOL),
        },
        mlp: ClassifierKind::Mlp {
            hidden: s.hidden,
            learning_rate: s.learning_rate.unwrap_or(DEFAULT_MLP_LEARNING_RATE),
            epochs: s.epochs.unwrap_or(DEFAULT_MLP_EPOCHS),
        },
    };
    for k in classifiers.columns() {
        problems.extend(k.violations());
    }
    let classifier_name = s.classifier.as_deref().unwrap_or("nb");
    let classifier = classifiers.get(classifier_name).cloned();
    if classifier.is_none() {
        problems.push(format!(
            "classifier: unknown `{classifier_name}` (expected nb|c45|svm|mlp)"
        ));
    }

    let (seeds, cells, grid) = match command {
        Command::Select => {
            if s.seeds.is_some() {
                problems.push("seeds: select takes a single --seed".into());
            }
            if s.cells.is_some() {
                problems.push("cells: only bench takes --cells".into());
            }
            (vec![s.seed.unwrap_or(0)], Vec::new(), Vec::new())
        }
        Command::Bench => {
            let seeds = s
                .seeds
                .clone()
                .or(s.seed.map(|x| vec![x]))
                .unwrap_or_else(|| DEFAULT_BENCH_SEEDS.to_vec());
            if seeds.is_empty() {
                problems.push("seeds: at least one seed is required".into());
            }
            // without --cells, --wrapper / --classifier narrow the full grid
            let specs = s.cells.clone().unwrap_or_else(|| {
                vec![format!(
                    "{}:{}",
                    s.wrapper.as_deref().unwrap_or("*"),
                    s.classifier.as_deref().unwrap_or("*")
                )]
            });
            let grid = parse_cells(&specs, &classifiers, &mut problems);
            if grid.is_empty() && problems.is_empty() {
                problems.push("cells: the grid is empty".into());
            }
            (seeds, specs, grid)
        }
    };

    if !problems.is_empty() {
        return Err(CliError::Validation(problems));
    }
    let dataset_path = resolve_dataset(s.dataset.as_deref())?;
    let (wrapper, classifier) = match command {
        Command::Select => (wrapper, classifier),
        Command::Bench => (None, None),
    };
    Ok(RunConfig {
        command: match command {
            Command::Select => "select",
            Command::Bench => "bench",
        },
        dataset: dataset_path.display().to_string(),
        wrapper,
        classifier,
        seeds,
        cells,
        format,
        cv,
        classifiers,
        dataset_path,
        grid,
        out: s.out,
    })
}
