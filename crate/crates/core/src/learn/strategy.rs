//! Strategies: ordered heuristic steps run against a fixed label set.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::metrics::MetricsReport;
use super::search::{
    backward_elimination, brute_force, forward_selection, genetic_search, hill_climb, BruteForceTarget, FunctionTarget,
    GeneticOptions, NumericParam, SearchContext, SearchOutcome, SelectionTarget,
};
use super::LearnError;
use crate::compare::{DDConfig, Hundredths};

pub const DEFAULT_HILL_STEP: f64 = 0.05;
pub const DEFAULT_HILL_STEP_PCT: u8 = 5;
pub const DEFAULT_MAX_ITERS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Heuristic {
    BruteForce,
    ForwardSelection,
    BackwardElimination,
    HillClimb,
    Genetic,
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Heuristic::BruteForce => "brute_force",
            Heuristic::ForwardSelection => "forward_selection",
            Heuristic::BackwardElimination => "backward_elimination",
            Heuristic::HillClimb => "hill_climb",
            Heuristic::Genetic => "genetic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepTarget {
    PreFilterProperties,
    PreFilterThreshold,
    Standardizers,
    Comparators,
    Weights,
    DecisionThreshold,
}

impl fmt::Display for StepTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepTarget::PreFilterProperties => "pre_filter_properties",
            StepTarget::PreFilterThreshold => "pre_filter_threshold",
            StepTarget::Standardizers => "standardizers",
            StepTarget::Comparators => "comparators",
            StepTarget::Weights => "weights",
            StepTarget::DecisionThreshold => "decision_threshold",
        })
    }
}

/// One strategy step. Options not relevant to the heuristic are ignored;
/// missing ones take the defaults (hill climbing: step 0.05, or 5 for the
/// pre-filter threshold, at most 40 moves; genetic: population 8, 10
/// generations, mutation probability 0.2, seed 0).
///
/// ```json
/// {"heuristic": "hill_climb", "target": "decision_threshold", "step": 0.05}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyStep {
    pub heuristic: Heuristic,
    pub target: StepTarget,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation_prob: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Restricts forward selection and backward elimination to these paths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<Vec<String>>,
}

impl StrategyStep {
    pub fn new(heuristic: Heuristic, target: StepTarget) -> Self {
        Self {
            heuristic,
            target,
            step: None,
            max_iters: None,
            population: None,
            generations: None,
            mutation_prob: None,
            seed: None,
            paths: None,
        }
    }

    pub fn hill_climb(target: StepTarget, step: f64) -> Self {
        Self {
            step: Some(step),
            ..Self::new(Heuristic::HillClimb, target)
        }
    }

    pub fn genetic(target: StepTarget, population: usize, generations: usize, seed: u64) -> Self {
        Self {
            population: Some(population),
            generations: Some(generations),
            seed: Some(seed),
            ..Self::new(Heuristic::Genetic, target)
        }
    }

    fn incompatible(&self) -> LearnError {
        LearnError::Incompatible {
            heuristic: self.heuristic.to_string(),
            target: self.target.to_string(),
        }
    }

    /// Step size in parameter units.
    fn step_units(&self) -> Result<u8, LearnError> {
        let units = match (self.target, self.step) {
            (StepTarget::PreFilterThreshold, None) => DEFAULT_HILL_STEP_PCT,
            (StepTarget::PreFilterThreshold, Some(s)) => {
                if s.fract() != 0.0 || !(1.0..=100.0).contains(&s) {
                    return Err(LearnError::InvalidOption(format!(
                        "pre-filter step {s} must be a whole percentage in [1, 100]"
                    )));
                }
                s as u8
            }
            (_, s) => Hundredths::from_f64(s.unwrap_or(DEFAULT_HILL_STEP))
                .map_err(|e| LearnError::InvalidOption(format!("step: {e}")))?
                .get(),
        };
        if units == 0 {
            return Err(LearnError::InvalidOption("step must be positive".into()));
        }
        Ok(units)
    }

    fn genetic_options(&self) -> GeneticOptions {
        let d = GeneticOptions::default();
        GeneticOptions {
            population: self.population.unwrap_or(d.population),
            generations: self.generations.unwrap_or(d.generations),
            mutation_prob: self.mutation_prob.unwrap_or(d.mutation_prob),
            seed: self.seed.unwrap_or(d.seed),
        }
    }

    /// Checks heuristic/target compatibility and option ranges.
    pub fn validate(&self) -> Result<(), LearnError> {
        use Heuristic::*;
        use StepTarget::*;
        match (self.heuristic, self.target) {
            (BruteForce, _) => Ok(()),
            (ForwardSelection | BackwardElimination, PreFilterProperties | Weights) => Ok(()),
            (HillClimb, PreFilterThreshold | DecisionThreshold | Weights) => self.step_units().map(drop),
            (Genetic, Comparators | Standardizers) => {
                let o = self.genetic_options();
                if o.population < 2 {
                    return Err(LearnError::InvalidOption("population must be at least 2".into()));
                }
                if !(0.0..=1.0).contains(&o.mutation_prob) {
                    return Err(LearnError::InvalidOption("mutation_prob must lie in [0, 1]".into()));
                }
                Ok(())
            }
            _ => Err(self.incompatible()),
        }
    }

    fn selection(&self) -> Result<SelectionTarget, LearnError> {
        match self.target {
            StepTarget::Weights => Ok(SelectionTarget::Weights),
            StepTarget::PreFilterProperties => Ok(SelectionTarget::PreFilterProperties),
            _ => Err(self.incompatible()),
        }
    }

    fn run(&self, ctx: &mut SearchContext, cfg: &DDConfig) -> Result<SearchOutcome, LearnError> {
        self.validate()?;
        let paths = self.paths.as_deref();
        match self.heuristic {
            Heuristic::ForwardSelection => forward_selection(ctx, cfg, self.selection()?, paths),
            Heuristic::BackwardElimination => backward_elimination(ctx, cfg, self.selection()?, paths),
            Heuristic::HillClimb => {
                let step = self.step_units()?;
                let iters = self.max_iters.unwrap_or(DEFAULT_MAX_ITERS);
                match self.target {
                    StepTarget::PreFilterThreshold => hill_climb(ctx, cfg, &NumericParam::PreFilterPct, step, iters),
                    StepTarget::DecisionThreshold => {
                        hill_climb(ctx, cfg, &NumericParam::DecisionThreshold, step, iters)
                    }
                    _ => {
                        let mut out = hill_climb(ctx, cfg, &NumericParam::DecisionThreshold, step, 0)?;
                        for path in cfg.comparison.paths.keys() {
                            out = hill_climb(ctx, &out.config, &NumericParam::Weight(path.clone()), step, iters)?;
                        }
                        Ok(out)
                    }
                }
            }
            Heuristic::Genetic => {
                let target = match self.target {
                    StepTarget::Comparators => FunctionTarget::Comparators,
                    _ => FunctionTarget::Standardizers,
                };
                genetic_search(ctx, cfg, target, &self.genetic_options())
            }
            Heuristic::BruteForce => {
                let target = match self.target {
                    StepTarget::PreFilterProperties => BruteForceTarget::PreFilterProperties,
                    StepTarget::PreFilterThreshold => BruteForceTarget::PreFilterPct,
                    StepTarget::Standardizers => BruteForceTarget::Standardizers,
                    StepTarget::Comparators => BruteForceTarget::Comparators,
                    StepTarget::Weights => BruteForceTarget::Weights,
                    StepTarget::DecisionThreshold => BruteForceTarget::DecisionThreshold,
                };
                brute_force(ctx, cfg, target)
            }
        }
    }
}

/// Validates every step of a strategy.
pub fn validate_strategy(steps: &[StrategyStep]) -> Result<(), LearnError> {
    steps.iter().try_for_each(StrategyStep::validate)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyOutcome {
    pub config: DDConfig,
    pub report: MetricsReport,
    pub initial_report: MetricsReport,
    pub completed_steps: usize,
    /// Set when a step failed; later steps were skipped.
    pub error: Option<String>,
}

/// Runs `steps` in order, each starting from the best configuration so far.
/// A failing step ends the strategy with the best configuration found before
/// it and the error recorded in the outcome.
pub fn execute_strategy(
    ctx: &mut SearchContext,
    start: &DDConfig,
    steps: &[StrategyStep],
) -> Result<StrategyOutcome, LearnError> {
    execute_strategy_observed(ctx, start, steps, |_, _| {})
}

/// [`execute_strategy`], calling `on_step(k, n)` before step `k` of `n` starts.
pub fn execute_strategy_observed(
    ctx: &mut SearchContext,
    start: &DDConfig,
    steps: &[StrategyStep],
    mut on_step: impl FnMut(usize, usize),
) -> Result<StrategyOutcome, LearnError> {
    if ctx.labels().is_empty() {
        return Err(LearnError::NoLabels);
    }
    ctx.begin_step(0, "initial");
    let initial_report = ctx.evaluate(start)?;
    let mut config = start.clone();
    let mut report = initial_report.clone();
    let mut completed_steps = 0;
    let mut error = None;
    for (i, step) in steps.iter().enumerate() {
        on_step(i + 1, steps.len());
        ctx.begin_step(i + 1, &step.heuristic.to_string());
        match step.run(ctx, &config) {
            Ok(out) => {
                if !ctx.better(&report, &out.report) {
                    config = out.config;
                    report = out.report;
                }
                completed_steps += 1;
            }
            Err(e) => {
                tracing::warn!(step = i + 1, error = %e, "strategy step failed");
                error = Some(format!("step {}: {e}", i + 1));
                break;
            }
        }
    }
    Ok(StrategyOutcome {
        config,
        report,
        initial_report,
        completed_steps,
        error,
    })
}
