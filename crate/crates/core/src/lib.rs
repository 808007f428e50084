//! Wrapper feature selection for binary tabular classification.
//!
//! The crate is organised around a single [`Dataset`] type that every learner
//! consumes, a [`FeatureMask`] bit vector that every subset search manipulates,
//! and one fit/predict contract ([`ClassifierKind`] → [`TrainedModel`]).
//!
//! * [`dataset`] parses the UCI Cleveland heart-disease file, imputes missing
//!   cells, projects through masks and builds stratified folds.
//! * [`classifiers`] holds Naive Bayes, C4.5, an SMO-trained polynomial SVM and
//!   an online back-propagation MLP.
//! * [`wrappers`] searches the subset lattice with a genetic algorithm,
//!   best-first search and sequential floating forward selection.
//! * [`evaluation`] runs the outer cross-validation protocol and the
//!   wrapper × classifier grid.

pub mod classifiers;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod rng;
pub mod wrappers;

pub use classifiers::{fit, ClassifierKind, Predictor, TrainedModel};
pub use dataset::{
    Cell, Dataset, FeatureKind, FeatureMask, FeatureSchema, FoldAssignment, Imputation, Instance,
    Label,
};
pub use error::{Error, Result};
pub use evaluation::{
    accuracy, bench, confusion, outer_cv, BenchCell, BenchConfig, BenchTable, ConfusionMatrix,
    CvConfig, CvReport, WrapperChoice,
};
pub use wrappers::{
    bfs_select, ga_select, sffs_select, FitnessEvaluator, GaConfig, SearchBudget, SffsConfig,
    WrapperResult,
};
