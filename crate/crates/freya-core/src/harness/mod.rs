//! Experiment harness: JSON configs in, trajectory/summary files out.
//!
//! [`config`] defines the document format and builds problems and worker
//! models from it; [`runner`] executes the (algorithm, γ, seed) grid and
//! applies the best-run selection and trailing-window summaries used for
//! method comparisons.

pub mod config;
pub mod runner;

pub use config::{
    AlgorithmConfig, BestRule, BudgetConfig, BuiltProblem, ExperimentConfig, GammaSpec,
    ProblemConfig, SgdAutoConfig, TauSpec, WorkerConfig, WorkerMode, REGISTERED_ALGORITHMS,
};
pub use runner::{
    best_run_select, run_experiment, summarize_variance, time_to_target, CellOutcome, RaceResult,
};
