//! Active learning with an oracle standing in for the human labeller.

use serde::{Deserialize, Serialize};

use super::defaults::{default_config, IgnoreList};
use super::labels::{next_to_label, LabelSet, LabelStore};
use super::metrics::{analyze, analyze_closed_world, MetricPrefs, MetricsReport};
use super::search::SearchContext;
use super::strategy::{execute_strategy, StrategyStep};
use super::LearnError;
use crate::compare::{run_duplicate_detection, DDConfig, RunOptions};
use crate::index::TypeIndex;

#[derive(Debug, Clone)]
pub struct SimulationOptions {
    pub rounds: usize,
    pub labels_per_round: usize,
    pub steps: Vec<StrategyStep>,
    pub prefs: MetricPrefs,
    pub run: RunOptions,
    pub ignore: IgnoreList,
    /// Stop after the first round whose F1 against the ground truth reaches this.
    pub stop_at_f1: Option<f64>,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            rounds: 5,
            labels_per_round: 20,
            steps: Vec::new(),
            prefs: MetricPrefs::default(),
            run: RunOptions::default(),
            ignore: IgnoreList::default(),
            stop_at_f1: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: usize,
    pub labelled: usize,
    pub evaluations: usize,
    pub config: DDConfig,
    /// Report on the labels collected so far.
    pub training: MetricsReport,
    /// Report against the full ground truth, unlisted pairs counting as non-duplicates.
    pub truth: MetricsReport,
    pub strategy_error: Option<String>,
}

/// Deduplicates `index` against itself: a bootstrap run with the low default
/// threshold, then per round the oracle labels the most uncertain pairs, the
/// strategy runs on all labels so far, and detection is re-run with the result.
/// Once labels exist the bootstrap threshold no longer applies, so the first
/// strategy starts from the regular default configuration.
pub fn simulate_active_learning(
    index: &TypeIndex,
    truth: &LabelSet,
    opts: &SimulationOptions,
) -> Result<Vec<RoundReport>, LearnError> {
    let spec = index.spec();
    let mut config = default_config(spec, spec, &opts.ignore, true)?;
    let mut results = run_duplicate_detection(index, index, &config, &opts.run)?;
    let mut store = LabelStore::in_memory();
    let mut rounds = Vec::new();
    for round in 1..=opts.rounds {
        let labels = store.label_set();
        for pair in next_to_label(&results, &labels, config.decision.threshold, opts.labels_per_round) {
            let dup = truth.get(&pair.source_id, &pair.target_id).unwrap_or(false);
            store.record(&pair.source_id, &pair.target_id, dup)?;
        }
        let labels = store.label_set();
        if labels.is_empty() {
            break;
        }
        if round == 1 {
            config = default_config(spec, spec, &opts.ignore, false)?;
        }
        let mut ctx = SearchContext::new(index, index, labels.clone(), opts.prefs, opts.run);
        let outcome = execute_strategy(&mut ctx, &config, &opts.steps)?;
        config = outcome.config;
        results = run_duplicate_detection(index, index, &config, &opts.run)?;
        let report = RoundReport {
            round,
            labelled: labels.len(),
            evaluations: ctx.audit().len(),
            config: config.clone(),
            training: analyze(&results, &labels),
            truth: analyze_closed_world(&results, truth),
            strategy_error: outcome.error,
        };
        tracing::info!(
            round,
            f1 = report.truth.f1,
            labelled = report.labelled,
            "round finished"
        );
        let done = opts.stop_at_f1.is_some_and(|t| report.truth.f1 >= t);
        rounds.push(report);
        if done {
            break;
        }
    }
    Ok(rounds)
}
