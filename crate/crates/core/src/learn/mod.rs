//! Active learning: labels, result analysis, and the configuration search
//! driven by labelled pairs.

pub mod defaults;
pub mod labels;
pub mod metrics;
pub mod search;
pub mod simulate;
pub mod strategy;
pub mod truth;

use crate::compare::DdError;
use crate::schema::SpecError;

pub use defaults::{default_config, IgnoreList, BOOTSTRAP_DECISION_THRESHOLD, DEFAULT_DECISION_THRESHOLD};
pub use labels::{next_to_label, LabelRecord, LabelSet, LabelStore, StoreError};
pub use metrics::{analyze, analyze_accepted, analyze_closed_world, better_than, Metric, MetricPrefs, MetricsReport};
pub use search::{
    backward_elimination, brute_force, forward_selection, genetic_search, hill_climb, AuditEntry, BruteForceTarget,
    FunctionTarget, GeneticOptions, NumericParam, SearchContext, SearchOutcome, SelectionTarget, MAX_ENUMERATION,
};
pub use simulate::{simulate_active_learning, RoundReport, SimulationOptions};
pub use strategy::{
    execute_strategy, execute_strategy_observed, validate_strategy, Heuristic, StepTarget, StrategyOutcome,
    StrategyStep,
};
pub use truth::{read_ground_truth, write_ground_truth, TruthError};

#[derive(Debug, thiserror::Error)]
pub enum LearnError {
    #[error(transparent)]
    Dd(#[from] DdError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("search space of {size} candidates exceeds the limit of {limit}")]
    SpaceTooLarge { size: u128, limit: usize },
    #[error("no mutable paths for {0}")]
    NoMutablePaths(String),
    #[error("{heuristic} cannot target {target}")]
    Incompatible { heuristic: String, target: String },
    #[error("unknown path {0}")]
    UnknownPath(String),
    #[error("the label store is empty")]
    NoLabels,
    #[error("invalid option: {0}")]
    InvalidOption(String),
}
