//! `wrapsel`: ingest the Cleveland data, run one wrapper, or run the
//! wrapper × classifier comparison grid.
//!
//! Exit codes: 0 success, 1 invalid configuration, 2 bad input data,
//! 3 runtime failure (including any failed grid cell).

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use wrapsel_core::dataset::{impute_missing, parse_uci_cleveland, DatasetSummary, FeatureSchema};
use wrapsel_core::evaluation::run_wrapper;
use wrapsel_core::wrappers::{fitness, HistoryEntry};
use wrapsel_core::{bench, BenchConfig, BenchTable, Dataset, FeatureMask};

use config::{resolve, resolve_dataset, Command as RunKind, Format, RunConfig, Settings};

#[derive(Debug)]
pub enum CliError {
    Validation(Vec<String>),
    Data(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Data(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(problems) => {
                write!(f, "invalid configuration:")?;
                for p in problems {
                    write!(f, "\n  - {p}")?;
                }
                Ok(())
            }
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<wrapsel_core::Error> for CliError {
    fn from(e: wrapsel_core::Error) -> Self {
        if let wrapsel_core::Error::Config(problems) = e.root() {
            CliError::Validation(problems.clone())
        } else if e.is_data_error() {
            CliError::Data(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

#[derive(Parser)]
#[command(name = "wrapsel", version, about = "Wrapper feature selection for heart-disease diagnosis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a dataset, print a summary and write the canonical CSV + schema sidecar
    Ingest {
        /// Input file (defaults to --dataset or $WRAPSEL_DATA_DIR)
        path: Option<PathBuf>,
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Canonical CSV destination (default: input path with a .csv extension)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one wrapper on the whole dataset and report the selected features
    Select(RunArgs),
    /// Outer cross-validation over a wrapper × classifier grid
    Bench(RunArgs),
}

#[derive(clap::Args)]
#[command(allow_negative_numbers = true)]
struct RunArgs {
    /// TOML file with the same keys as the flags; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Ingest { path, dataset, out } => ingest(path.or(dataset).as_deref(), out),
        Command::Select(args) => settings(args, RunKind::Select).and_then(|s| resolve(s, RunKind::Select)).and_then(|c| select(&c)),
        Command::Bench(args) => settings(args, RunKind::Bench).and_then(|s| resolve(s, RunKind::Bench)).and_then(|c| run_bench(&c)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}

fn settings(args: RunArgs, kind: RunKind) -> Result<Settings, CliError> {
    let Some(path) = &args.config else {
        return Ok(args.settings);
    };
    let mut file = Settings::from_file(path)?;
    if kind == RunKind::Select {
        // one file can serve both commands; select only rejects these as flags
        file.seeds = None;
        file.cells = None;
    }
    Ok(args.settings.over(file))
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".schema");
    PathBuf::from(s)
}

/// Canonical CSV when a schema sidecar sits next to the file, UCI text otherwise.
fn load(path: &Path) -> Result<(Dataset, bool), CliError> {
    let read = |p: &Path| {
        std::fs::read_to_string(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))
    };
    let text = read(path)?;
    let sidecar = sidecar_path(path);
    let in_context = |e: wrapsel_core::Error| CliError::from(e.context(path.display().to_string()));
    if sidecar.exists() {
        let schema = FeatureSchema::parse_sidecar(&read(&sidecar)?).map_err(in_context)?;
        Ok((Dataset::from_csv(&text, schema).map_err(in_context)?, true))
    } else {
        Ok((parse_uci_cleveland(&text).map_err(in_context)?, false))
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))
}

/// First line of text and CSV reports, so they carry the effective settings too.
fn config_line(cfg: &RunConfig) -> Result<String, CliError> {
    let json = serde_json::to_string(cfg).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(format!("# wrapsel {} config: {json}\n", env!("CARGO_PKG_VERSION")))
}

fn emit(out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn ingest(path: Option<&Path>, out: Option<PathBuf>) -> Result<(), CliError> {
    let path = resolve_dataset(path)?;
    let (d, canonical) = load(&path)?;
    let summary: DatasetSummary = d.summary();
    print!("{summary}");
    println!("fingerprint: {}", d.fingerprint());
    let target = out.unwrap_or_else(|| path.with_extension("csv"));
    if canonical && target == path {
        eprintln!("{} is already canonical; nothing written", path.display());
        return Ok(());
    }
    write_file(&target, &d.to_csv())?;
    write_file(&sidecar_path(&target), &d.schema().to_sidecar())?;
    eprintln!("wrote {} and {}", target.display(), sidecar_path(&target).display());
    Ok(())
}

#[derive(Serialize)]
struct SelectReport<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    dataset_fingerprint: String,
    instances: usize,
    mask: FeatureMask,
    selected_features: Vec<String>,
    fitness: f64,
    evaluations: usize,
    fits: usize,
    truncated: bool,
    history: Vec<HistoryEntry>,
}

fn select(cfg: &RunConfig) -> Result<(), CliError> {
    let (raw, _) = load(&cfg.dataset_path)?;
    let d = impute_missing(&raw, cfg.cv.imputation)?;
    let kind = cfg.classifier.as_ref().expect("select resolves a classifier");
    let wrapper = cfg.wrapper.expect("select resolves a wrapper");
    let seed = cfg.seeds[0];
    let report = match run_wrapper(wrapper, &d, kind, &cfg.cv, seed)? {
        Some(r) => SelectReport {
            tool: "wrapsel",
            version: env!("CARGO_PKG_VERSION"),
            config: cfg,
            dataset_fingerprint: d.fingerprint(),
            instances: d.len(),
            mask: r.best_mask,
            selected_features: r.selected_features,
            fitness: r.best_fitness,
            evaluations: r.evaluations,
            fits: r.fits,
            truncated: r.truncated,
            history: r.history,
        },
        None => {
            let mask = FeatureMask::ones(d.n_features());
            SelectReport {
                tool: "wrapsel",
                version: env!("CARGO_PKG_VERSION"),
                config: cfg,
                dataset_fingerprint: d.fingerprint(),
                instances: d.len(),
                fitness: fitness(&mask, &d, kind, cfg.cv.fitness_folds, seed)?,
                selected_features: mask.selected_names(d.schema()).into_iter().map(String::from).collect(),
                mask,
                evaluations: 1,
                fits: cfg.cv.fitness_folds,
                truncated: false,
                history: Vec::new(),
            }
        }
    };
    let text = match cfg.format {
        Format::Json => serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))? + "\n",
        Format::Csv => {
            let mut s = config_line(cfg)?;
            s.push_str("step,best_fitness,mean_fitness,note\n");
            for (i, h) in report.history.iter().enumerate() {
                let _ = writeln!(s, "{},{},{},{}", i + 1, h.best_fitness, h.mean_fitness, h.note);
            }
            s
        }
        Format::Table => {
            let mut s = config_line(cfg)?;
            let _ = writeln!(s, "wrapper     {}", wrapper.label());
            let _ = writeln!(s, "classifier  {}", kind.label());
            let _ = writeln!(s, "seed        {seed}");
            let _ = writeln!(s, "mask        {}", report.mask);
            let _ = writeln!(s, "selected    {}", report.selected_features.join(", "));
            let _ = writeln!(s, "fitness     {:.4}", report.fitness);
            let _ = writeln!(s, "evaluations {} ({} fits){}", report.evaluations, report.fits,
                if report.truncated { ", truncated" } else { "" });
            for (i, h) in report.history.iter().enumerate() {
                let _ = writeln!(s, "{:>4}  best {:.4}  mean {:.4}  {}", i + 1, h.best_fitness, h.mean_fitness, h.note);
            }
            s
        }
    };
    emit(cfg.out.as_deref(), &text)
}

#[derive(Serialize)]
struct BenchReport<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    table: &'a BenchTable,
}

fn run_bench(cfg: &RunConfig) -> Result<(), CliError> {
    let (d, _) = load(&cfg.dataset_path)?;
    let table = bench(
        &d,
        &BenchConfig {
            cells: cfg.grid.clone(),
            seeds: cfg.seeds.clone(),
            cv: cfg.cv.clone(),
        },
    );
    for cell in &table.cells {
        let status = match &cell.outcome {
            wrapsel_core::evaluation::CellOutcome::Ok { mean_accuracy, .. } => {
                format!("{:.2}%", mean_accuracy * 100.0)
            }
            wrapsel_core::evaluation::CellOutcome::Failed { error } => format!("FAILED: {error}"),
        };
        eprintln!(
            "{}:{}  {:.2?}  {status}",
            cell.wrapper.short_name(),
            cell.classifier.short_name(),
            cell.elapsed
        );
    }
    let text = match cfg.format {
        Format::Json => {
            let report = BenchReport {
                tool: "wrapsel",
                version: env!("CARGO_PKG_VERSION"),
                config: cfg,
                table: &table,
            };
            serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))? + "\n"
        }
        Format::Csv => config_line(cfg)? + &table.to_csv(),
        Format::Table => config_line(cfg)? + &table.to_table(),
    };
    emit(cfg.out.as_deref(), &text)?;
    if table.any_failed() {
        return Err(CliError::Runtime("one or more grid cells failed".into()));
    }
    Ok(())
}
