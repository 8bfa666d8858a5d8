//! Search heuristics over the duplicate-detection configuration.
//!
//! Every heuristic scores candidate configurations through
//! [`SearchContext::evaluate`], which yields the same report as a full
//! [`run_duplicate_detection`](crate::compare::run_duplicate_detection) followed
//! by [`analyze`](super::analyze). Only labelled pairs influence a report, so
//! the context scores just the candidate pairs that carry a label.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::labels::LabelSet;
use super::metrics::{analyze_accepted, better_than, MetricPrefs, MetricsReport};
use super::LearnError;
use crate::compare::{
    compare_instances, decide, pair_key, Aggregation, Comparator, DDConfig, DdError, Hundredths, RunOptions,
};
use crate::index::{PreFilterConfig, TypeIndex};
use crate::standardize::{apply_plan, Standardizer};

/// Largest candidate count brute force will enumerate.
pub const MAX_ENUMERATION: usize = 10_000;

/// One evaluated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub seq: usize,
    pub step: usize,
    pub heuristic: String,
    pub config_hash: String,
    pub config: DDConfig,
    pub report: MetricsReport,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub config: DDConfig,
    pub report: MetricsReport,
}

/// Index pair, labels and preferences shared by all heuristics, plus the
/// audit log of every evaluation.
pub struct SearchContext<'a> {
    source: &'a TypeIndex,
    target: &'a TypeIndex,
    labels: LabelSet,
    prefs: MetricPrefs,
    opts: RunOptions,
    candidates: HashMap<String, Arc<Vec<(String, String)>>>,
    reports: HashMap<String, MetricsReport>,
    audit: Vec<AuditEntry>,
    step: usize,
    heuristic: String,
}

impl<'a> SearchContext<'a> {
    /// Pass the same index twice for deduplication within one index.
    pub fn new(
        source: &'a TypeIndex,
        target: &'a TypeIndex,
        labels: LabelSet,
        prefs: MetricPrefs,
        opts: RunOptions,
    ) -> Self {
        Self {
            source,
            target,
            labels,
            prefs,
            opts,
            candidates: HashMap::new(),
            reports: HashMap::new(),
            audit: Vec::new(),
            step: 0,
            heuristic: "evaluate".into(),
        }
    }

    pub fn labels(&self) -> &LabelSet {
        &self.labels
    }

    pub fn prefs(&self) -> &MetricPrefs {
        &self.prefs
    }

    pub fn options(&self) -> &RunOptions {
        &self.opts
    }

    pub fn source(&self) -> &'a TypeIndex {
        self.source
    }

    pub fn target(&self) -> &'a TypeIndex {
        self.target
    }

    pub fn audit(&self) -> &[AuditEntry] {
        &self.audit
    }

    /// Tags subsequent audit entries.
    pub fn begin_step(&mut self, step: usize, heuristic: &str) {
        self.step = step;
        self.heuristic = heuristic.to_string();
    }

    pub fn better(&self, a: &MetricsReport, b: &MetricsReport) -> bool {
        better_than(a, b, &self.prefs)
    }

    /// Scores `cfg` on the labelled pairs and appends an audit entry.
    pub fn evaluate(&mut self, cfg: &DDConfig) -> Result<MetricsReport, DdError> {
        cfg.validate(self.source.spec(), self.target.spec())?;
        let hash = cfg.hash();
        let report = match self.reports.get(&hash) {
            Some(r) => r.clone(),
            None => {
                let r = self.compute(cfg)?;
                self.reports.insert(hash.clone(), r.clone());
                r
            }
        };
        self.audit.push(AuditEntry {
            seq: self.audit.len(),
            step: self.step,
            heuristic: self.heuristic.clone(),
            config_hash: hash,
            config: cfg.clone(),
            report: report.clone(),
            timestamp: Utc::now(),
        });
        Ok(report)
    }

    fn compute(&mut self, cfg: &DDConfig) -> Result<MetricsReport, DdError> {
        let pairs = self.labelled_candidates(&cfg.pre_filter)?;
        let mut accepted = BTreeSet::new();
        for (s, t) in pairs.iter() {
            let (Some(a), Some(b)) = (self.source.get(s), self.target.get(t)) else {
                continue;
            };
            let pair = compare_instances(&apply_plan(a, &cfg.plan), &apply_plan(b, &cfg.plan), &cfg.comparison);
            if decide(&pair, &cfg.decision) {
                accepted.insert(pair_key(s, t));
            }
        }
        Ok(analyze_accepted(&accepted, &self.labels))
    }

    /// The candidate pairs a full run would produce whose unordered key is labelled.
    fn labelled_candidates(&mut self, pf: &PreFilterConfig) -> Result<Arc<Vec<(String, String)>>, DdError> {
        let key = serde_json::to_string(pf).expect("pre-filter serializes");
        if let Some(c) = self.candidates.get(&key) {
            return Ok(c.clone());
        }
        pf.validate(self.source.spec())?;
        let self_join = std::ptr::eq(self.source, self.target);
        let ids: BTreeSet<&str> = self
            .labels
            .iter()
            .flat_map(|((a, b), _)| [a.as_str(), b.as_str()])
            .collect();
        let mut out = BTreeSet::new();
        for id in ids {
            let Some(doc) = self.source.get(id) else { continue };
            let exclude = self_join.then_some(id);
            for c in self
                .target
                .more_like_this(doc, pf, self.opts.candidate_limit, exclude)?
            {
                let pair = if self_join {
                    pair_key(id, &c.id)
                } else {
                    (id.to_string(), c.id)
                };
                if self.labels.contains(&pair.0, &pair.1) {
                    out.insert(pair);
                }
            }
        }
        let out = Arc::new(out.into_iter().collect::<Vec<_>>());
        self.candidates.insert(key, out.clone());
        Ok(out)
    }

    fn try_evaluate(&mut self, cfg: &DDConfig) -> Option<MetricsReport> {
        self.evaluate(cfg).ok()
    }
}

/// Keeps the first strictly best (config, report) seen.
struct Best {
    config: DDConfig,
    report: MetricsReport,
}

impl Best {
    fn offer(&mut self, ctx: &SearchContext, config: &DDConfig, report: &MetricsReport) {
        if ctx.better(report, &self.report) {
            self.config = config.clone();
            self.report = report.clone();
        }
    }

    fn into_outcome(self) -> SearchOutcome {
        SearchOutcome {
            config: self.config,
            report: self.report,
        }
    }
}

fn start(ctx: &mut SearchContext, cfg: &DDConfig) -> Result<Best, LearnError> {
    let report = ctx.evaluate(cfg)?;
    Ok(Best {
        config: cfg.clone(),
        report,
    })
}

/// What forward selection and backward elimination switch on and off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionTarget {
    /// Comparison weights: a path is selected when its weight is above 0.
    Weights,
    /// Properties sampled by the pre-filter.
    PreFilterProperties,
}

impl SelectionTarget {
    fn default_paths(self, cfg: &DDConfig) -> Vec<String> {
        match self {
            SelectionTarget::Weights => cfg.comparison.paths.keys().cloned().collect(),
            SelectionTarget::PreFilterProperties => cfg.pre_filter.properties.clone(),
        }
    }

    /// `cfg` with exactly the `selected` paths of `universe` switched on. A
    /// selected weight keeps its value when positive and becomes 1 otherwise.
    fn apply(self, cfg: &DDConfig, universe: &[String], selected: &BTreeSet<&str>) -> DDConfig {
        let mut out = cfg.clone();
        match self {
            SelectionTarget::Weights => {
                for path in universe {
                    if let Some(pc) = out.comparison.paths.get_mut(path) {
                        pc.weight = match (selected.contains(path.as_str()), pc.weight) {
                            (false, _) => Hundredths::ZERO,
                            (true, Hundredths::ZERO) => Hundredths::ONE,
                            (true, w) => w,
                        };
                    }
                }
            }
            SelectionTarget::PreFilterProperties => {
                let mut props: Vec<String> = cfg
                    .pre_filter
                    .properties
                    .iter()
                    .filter(|p| !universe.contains(p))
                    .cloned()
                    .collect();
                props.extend(universe.iter().filter(|p| selected.contains(p.as_str())).cloned());
                props.sort();
                out.pre_filter.properties = props;
            }
        }
        out
    }
}

fn check_paths(cfg: &DDConfig, target: SelectionTarget, paths: &[String]) -> Result<(), LearnError> {
    for p in paths {
        let known = match target {
            SelectionTarget::Weights => cfg.comparison.paths.contains_key(p),
            SelectionTarget::PreFilterProperties => cfg.pre_filter.properties.contains(p),
        };
        if !known {
            return Err(LearnError::UnknownPath(p.clone()));
        }
    }
    Ok(())
}

/// Each path evaluated alone, best first; ties keep path order. Paths whose
/// isolated configuration is invalid are dropped.
fn rank_isolated(
    ctx: &mut SearchContext,
    cfg: &DDConfig,
    target: SelectionTarget,
    paths: &[String],
) -> Vec<(String, MetricsReport)> {
    let mut ranked = Vec::new();
    for p in paths {
        let alone = target.apply(cfg, paths, &BTreeSet::from([p.as_str()]));
        if let Some(r) = ctx.try_evaluate(&alone) {
            ranked.push((p.clone(), r));
        }
    }
    let prefs = *ctx.prefs();
    ranked.sort_by(|(_, a), (_, b)| {
        if better_than(a, b, &prefs) {
            std::cmp::Ordering::Less
        } else if better_than(b, a, &prefs) {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    });
    ranked
}

/// Ranks paths by their isolated report, then adds them best-first while the
/// report strictly improves. `paths` defaults to every path of the target.
pub fn forward_selection(
    ctx: &mut SearchContext,
    cfg: &DDConfig,
    target: SelectionTarget,
    paths: Option<&[String]>,
) -> Result<SearchOutcome, LearnError> {
    let paths = paths
        .map(<[String]>::to_vec)
        .unwrap_or_else(|| target.default_paths(cfg));
    if paths.is_empty() {
        return Err(LearnError::NoMutablePaths("forward selection".into()));
    }
    check_paths(cfg, target, &paths)?;
    let mut best = start(ctx, cfg)?;
    let ranked = rank_isolated(ctx, cfg, target, &paths);
    let Some((first, first_report)) = ranked.first() else {
        return Ok(best.into_outcome());
    };
    let mut selected = BTreeSet::from([first.as_str()]);
    let mut current = first_report.clone();
    best.offer(ctx, &target.apply(cfg, &paths, &selected), &current);
    for (p, _) in &ranked[1..] {
        let mut trial = selected.clone();
        trial.insert(p.as_str());
        let candidate = target.apply(cfg, &paths, &trial);
        let Some(r) = ctx.try_evaluate(&candidate) else { break };
        if !ctx.better(&r, &current) {
            break;
        }
        best.offer(ctx, &candidate, &r);
        selected = trial;
        current = r;
    }
    Ok(best.into_outcome())
}

/// Starts from every path switched on and removes the worst isolated path
/// while the report does not get worse, never removing the last one.
pub fn backward_elimination(
    ctx: &mut SearchContext,
    cfg: &DDConfig,
    target: SelectionTarget,
    paths: Option<&[String]>,
) -> Result<SearchOutcome, LearnError> {
    let paths = paths
        .map(<[String]>::to_vec)
        .unwrap_or_else(|| target.default_paths(cfg));
    if paths.len() < 2 {
        return Err(LearnError::NoMutablePaths(
            "backward elimination needs two paths".into(),
        ));
    }
    check_paths(cfg, target, &paths)?;
    let mut best = start(ctx, cfg)?;
    let mut selected: BTreeSet<&str> = paths.iter().map(String::as_str).collect();
    let all = target.apply(cfg, &paths, &selected);
    let mut current = ctx.evaluate(&all)?;
    best.offer(ctx, &all, &current);
    let ranked = rank_isolated(ctx, cfg, target, &paths);
    for (p, _) in ranked.iter().rev() {
        if selected.len() == 1 {
            break;
        }
        let mut trial = selected.clone();
        trial.remove(p.as_str());
        let candidate = target.apply(cfg, &paths, &trial);
        let Some(r) = ctx.try_evaluate(&candidate) else { break };
        if ctx.better(&current, &r) {
            break;
        }
        best.offer(ctx, &candidate, &r);
        selected = trial;
        current = r;
    }
    Ok(best.into_outcome())
}

/// A numeric configuration parameter, quantized to integer units: percent for
/// the pre-filter threshold, hundredths otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericParam {
    PreFilterPct,
    DecisionThreshold,
    Weight(String),
}

impl NumericParam {
    fn get(&self, cfg: &DDConfig) -> Result<u8, LearnError> {
        Ok(match self {
            NumericParam::PreFilterPct => cfg.pre_filter.threshold_pct,
            NumericParam::DecisionThreshold => cfg.decision.threshold.get(),
            NumericParam::Weight(p) => cfg
                .comparison
                .paths
                .get(p)
                .ok_or_else(|| LearnError::UnknownPath(p.clone()))?
                .weight
                .get(),
        })
    }

    fn set(&self, cfg: &DDConfig, units: u8) -> DDConfig {
        let mut out = cfg.clone();
        let h = Hundredths::clamped(i64::from(units));
        match self {
            NumericParam::PreFilterPct => out.pre_filter.threshold_pct = units.min(100),
            NumericParam::DecisionThreshold => out.decision.threshold = h,
            NumericParam::Weight(p) => {
                if let Some(pc) = out.comparison.paths.get_mut(p) {
                    pc.weight = h;
                }
            }
        }
        out
    }
}

/// Moves `param` by `step` units toward the strictly better neighbour until
/// neither neighbour improves or `max_iters` moves were made. Neighbours are
/// clamped to `[0, 100]` units; the lower one is tried first and wins ties.
pub fn hill_climb(
    ctx: &mut SearchContext,
    cfg: &DDConfig,
    param: &NumericParam,
    step: u8,
    max_iters: usize,
) -> Result<SearchOutcome, LearnError> {
    if step == 0 {
        return Err(LearnError::InvalidOption("hill climbing step must be positive".into()));
    }
    param.get(cfg)?;
    let mut current = start(ctx, cfg)?;
    for _ in 0..max_iters {
        let v = param.get(&current.config)?;
        let neighbours = [v.saturating_sub(step), v.saturating_add(step).min(100)];
        let mut moved: Option<(DDConfig, MetricsReport)> = None;
        for n in neighbours {
            if n == v {
                continue;
            }
            let candidate = param.set(&current.config, n);
            let Some(r) = ctx.try_evaluate(&candidate) else {
                continue;
            };
            let improves = ctx.better(&r, &current.report) && moved.as_ref().is_none_or(|(_, m)| ctx.better(&r, m));
            if improves {
                moved = Some((candidate, r));
            }
        }
        match moved {
            Some((config, report)) => current = Best { config, report },
            None => break,
        }
    }
    Ok(current.into_outcome())
}

/// Parameters brute force can enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BruteForceTarget {
    PreFilterPct,
    DecisionThreshold,
    /// Every non-empty subset of weighted paths.
    Weights,
    /// Every non-empty subset of pre-filter properties.
    PreFilterProperties,
    Comparators,
    Standardizers,
}

/// Evaluates every candidate value of `target` in ascending order (subsets by
/// ascending bit mask over path order, function assignments with the first
/// path most significant) and returns the first best. The starting
/// configuration is kept when it beats every candidate.
pub fn brute_force(
    ctx: &mut SearchContext,
    cfg: &DDConfig,
    target: BruteForceTarget,
) -> Result<SearchOutcome, LearnError> {
    let candidates: Box<dyn Iterator<Item = DDConfig>> = match target {
        BruteForceTarget::PreFilterPct => {
            let cfg = cfg.clone();
            Box::new((0..=100u8).map(move |v| NumericParam::PreFilterPct.set(&cfg, v)))
        }
        BruteForceTarget::DecisionThreshold => {
            let cfg = cfg.clone();
            Box::new((0..=100u8).map(move |v| NumericParam::DecisionThreshold.set(&cfg, v)))
        }
        BruteForceTarget::Weights | BruteForceTarget::PreFilterProperties => {
            let sel = if target == BruteForceTarget::Weights {
                SelectionTarget::Weights
            } else {
                SelectionTarget::PreFilterProperties
            };
            let paths = sel.default_paths(cfg);
            let size = 1u128.checked_shl(paths.len() as u32).unwrap_or(u128::MAX);
            if size > MAX_ENUMERATION as u128 {
                return Err(LearnError::SpaceTooLarge {
                    size,
                    limit: MAX_ENUMERATION,
                });
            }
            let cfg = cfg.clone();
            Box::new((1..size as u64).map(move |mask| {
                let selected: BTreeSet<&str> = paths
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, p)| p.as_str())
                    .collect();
                sel.apply(&cfg, &paths, &selected)
            }))
        }
        BruteForceTarget::Comparators | BruteForceTarget::Standardizers => {
            let ft = if target == BruteForceTarget::Comparators {
                FunctionTarget::Comparators
            } else {
                FunctionTarget::Standardizers
            };
            let space = FunctionSpace::new(ctx, cfg, ft)?;
            let size = space
                .catalogs
                .iter()
                .try_fold(1u128, |acc, c| acc.checked_mul(c.len() as u128))
                .unwrap_or(u128::MAX);
            if size > MAX_ENUMERATION as u128 {
                return Err(LearnError::SpaceTooLarge {
                    size,
                    limit: MAX_ENUMERATION,
                });
            }
            let cfg = cfg.clone();
            Box::new((0..size as usize).map(move |mut n| {
                let mut genome = vec![Gene::Plan(Vec::new()); space.catalogs.len()];
                for (i, catalog) in space.catalogs.iter().enumerate().rev() {
                    genome[i] = catalog[n % catalog.len()].clone();
                    n /= catalog.len();
                }
                space.apply(&cfg, &genome)
            }))
        }
    };
    let initial = start(ctx, cfg)?;
    let mut best: Option<Best> = None;
    for candidate in candidates {
        let Some(r) = ctx.try_evaluate(&candidate) else {
            continue;
        };
        match &mut best {
            None => {
                best = Some(Best {
                    config: candidate,
                    report: r,
                })
            }
            Some(b) => b.offer(ctx, &candidate, &r),
        }
    }
    Ok(match best {
        Some(b) if !ctx.better(&initial.report, &b.report) => b.into_outcome(),
        _ => initial.into_outcome(),
    })
}

/// Function mappings the genetic search varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionTarget {
    Comparators,
    Standardizers,
}

/// The function assigned to one path.
#[derive(Debug, Clone, PartialEq, Serialize)]
enum Gene {
    Comparison(Comparator, Aggregation),
    Plan(Vec<Standardizer>),
}

/// Mutable paths of a function target with the catalog each draws from.
///
/// Comparators vary on weighted paths, standardizers on the literal fields at
/// or below a weighted path.
struct FunctionSpace {
    target: FunctionTarget,
    paths: Vec<String>,
    catalogs: Vec<Vec<Gene>>,
}

impl FunctionSpace {
    fn new(ctx: &SearchContext, cfg: &DDConfig, target: FunctionTarget) -> Result<Self, LearnError> {
        let spec = ctx.source().spec();
        let weighted: Vec<&String> = cfg.comparison.weighted_paths().map(|(p, _)| p).collect();
        let mut paths = Vec::new();
        let mut catalogs = Vec::new();
        match target {
            FunctionTarget::Comparators => {
                for path in weighted {
                    let prop = spec
                        .property(path)
                        .ok_or_else(|| LearnError::UnknownPath(path.clone()))?;
                    let catalog = Comparator::catalog(prop.category, prop.is_nested_instance)
                        .into_iter()
                        .flat_map(|c| Aggregation::ALL.map(|a| Gene::Comparison(c, a)))
                        .collect();
                    paths.push(path.clone());
                    catalogs.push(catalog);
                }
            }
            FunctionTarget::Standardizers => {
                for prop in &spec.properties {
                    let under_weighted = weighted
                        .iter()
                        .any(|w| prop.field == **w || prop.field.starts_with(&format!("{w}.")));
                    if prop.is_nested_instance || !under_weighted {
                        continue;
                    }
                    paths.push(prop.field.clone());
                    catalogs.push(
                        Standardizer::sequence_catalog(prop.category, prop.multi_valued)
                            .into_iter()
                            .map(Gene::Plan)
                            .collect(),
                    );
                }
            }
        }
        if paths.is_empty() {
            let name = match target {
                FunctionTarget::Comparators => "comparators",
                FunctionTarget::Standardizers => "standardizers",
            };
            return Err(LearnError::NoMutablePaths(name.into()));
        }
        Ok(Self {
            target,
            paths,
            catalogs,
        })
    }

    fn genome_of(&self, cfg: &DDConfig) -> Vec<Gene> {
        self.paths
            .iter()
            .map(|p| match self.target {
                FunctionTarget::Comparators => {
                    let pc = &cfg.comparison.paths[p];
                    Gene::Comparison(pc.comparator, pc.aggregation)
                }
                FunctionTarget::Standardizers => Gene::Plan(cfg.plan.get(p).to_vec()),
            })
            .collect()
    }

    fn apply(&self, cfg: &DDConfig, genome: &[Gene]) -> DDConfig {
        let mut out = cfg.clone();
        for (path, gene) in self.paths.iter().zip(genome) {
            match gene {
                Gene::Comparison(c, a) => {
                    if let Some(pc) = out.comparison.paths.get_mut(path) {
                        pc.comparator = *c;
                        pc.aggregation = *a;
                    }
                }
                Gene::Plan(seq) if seq.is_empty() => {
                    out.plan.paths.remove(path);
                }
                Gene::Plan(seq) => {
                    out.plan.paths.insert(path.clone(), seq.clone());
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneticOptions {
    pub population: usize,
    pub generations: usize,
    pub mutation_prob: f64,
    pub seed: u64,
}

impl Default for GeneticOptions {
    fn default() -> Self {
        Self {
            population: 8,
            generations: 10,
            mutation_prob: 0.2,
            seed: 0,
        }
    }
}

/// Genetic search over per-path function assignments.
///
/// The genome lists one gene per mutable path in path order. The first
/// individual is the starting configuration; the others are mutants of it with
/// at least one resampled gene. Each generation keeps the best individual and
/// fills up with children of two size-2 tournaments, single-point crossover and
/// per-gene mutation drawn uniformly from the path's catalog. The result is the
/// first best individual ever evaluated, and is fully determined by the seed.
pub fn genetic_search(
    ctx: &mut SearchContext,
    cfg: &DDConfig,
    target: FunctionTarget,
    opts: &GeneticOptions,
) -> Result<SearchOutcome, LearnError> {
    if opts.population < 2 {
        return Err(LearnError::InvalidOption("population must be at least 2".into()));
    }
    if !(0.0..=1.0).contains(&opts.mutation_prob) {
        return Err(LearnError::InvalidOption("mutation_prob must lie in [0, 1]".into()));
    }
    let space = FunctionSpace::new(ctx, cfg, target)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = start(ctx, cfg)?;
    let origin = space.genome_of(cfg);
    let draw = |rng: &mut ChaCha8Rng, i: usize| {
        let catalog = &space.catalogs[i];
        catalog[rng.random_range(0..catalog.len())].clone()
    };
    let mutate = |rng: &mut ChaCha8Rng, genome: &mut Vec<Gene>| {
        for (i, gene) in genome.iter_mut().enumerate() {
            if rng.random_bool(opts.mutation_prob) {
                *gene = draw(rng, i);
            }
        }
    };

    let mut population = vec![origin.clone()];
    while population.len() < opts.population {
        let mut g = origin.clone();
        mutate(&mut rng, &mut g);
        if opts.mutation_prob > 0.0 {
            let i = rng.random_range(0..g.len());
            g[i] = draw(&mut rng, i);
        }
        population.push(g);
    }

    let evaluate_all = |ctx: &mut SearchContext, best: &mut Best, pop: &[Vec<Gene>]| {
        pop.iter()
            .map(|g| {
                let config = space.apply(cfg, g);
                let r = ctx.try_evaluate(&config);
                if let Some(r) = &r {
                    best.offer(ctx, &config, r);
                }
                r
            })
            .collect::<Vec<Option<MetricsReport>>>()
    };
    let mut fitness = evaluate_all(ctx, &mut best, &population);
    for _ in 0..opts.generations {
        let prefs = *ctx.prefs();
        let fitter = |a: &Option<MetricsReport>, b: &Option<MetricsReport>| match (a, b) {
            (Some(a), Some(b)) => better_than(a, b, &prefs),
            (Some(_), None) => true,
            _ => false,
        };
        let mut elite = 0;
        for i in 1..population.len() {
            if fitter(&fitness[i], &fitness[elite]) {
                elite = i;
            }
        }
        let tournament = |rng: &mut ChaCha8Rng| {
            let i = rng.random_range(0..population.len());
            let j = rng.random_range(0..population.len());
            if fitter(&fitness[j], &fitness[i]) {
                j
            } else {
                i
            }
        };
        let mut next = vec![population[elite].clone()];
        while next.len() < opts.population {
            let p1 = tournament(&mut rng);
            let p2 = tournament(&mut rng);
            let mut child = if population[p1].len() > 1 {
                let point = rng.random_range(1..population[p1].len());
                population[p1][..point]
                    .iter()
                    .chain(&population[p2][point..])
                    .cloned()
                    .collect()
            } else {
                population[p1].clone()
            };
            mutate(&mut rng, &mut child);
            next.push(child);
        }
        population = next;
        fitness = evaluate_all(ctx, &mut best, &population);
    }
    Ok(best.into_outcome())
}
