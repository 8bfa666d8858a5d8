//! Acceptance checks. Each returns a one-line summary or the reason it failed.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use kgdedup::compare::pair_key;
use kgdedup::fixtures::{running_example_index, ENTITY_1234, ENTITY_5678, EVENT_TYPE};
use kgdedup::learn::Heuristic;
use kgdedup::learn::{
    analyze_accepted, backward_elimination, better_than, default_config, forward_selection, genetic_search, hill_climb,
    simulate_active_learning, FunctionTarget, GeneticOptions, IgnoreList, LabelSet, MetricPrefs, MetricsReport,
    NumericParam, SearchContext, SelectionTarget, SimulationOptions, StepTarget, StrategyStep,
};
use kgdedup::workspace::{SpecSource, Workspace, WorkspaceError, WorkspaceOptions};
use kgdedup::{
    apply_plan, compare_instances, decide, run_duplicate_detection, serialize_fields, Aggregation, DDConfig,
    Hundredths, PathMode, RunOptions, TypeIndex,
};

use super::corpus::check_corpus;
use super::fixtures::{
    brute_force_pipeline, levenshtein_dp, max_sample_terms, selection_fixture, sweep_fixture, synth_index,
};
use super::props;

pub type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

const UNLIMITED: RunOptions = RunOptions { candidate_limit: None };

/// Detection on a 100-instance synthetic graph matches the all-pairs pipeline.
pub fn oracle_equivalence() -> Check {
    let (_, index) = synth_index(100, 42);
    let spec = index.spec();
    let mut cfg = default_config(spec, spec, &IgnoreList::default(), false).map_err(|e| e.to_string())?;
    cfg.pre_filter.threshold_pct = 1;
    let terms = max_sample_terms(&index, &cfg.pre_filter.properties);
    ensure!(
        cfg.pre_filter.required(terms) == 1,
        "largest sample has {terms} terms; required count is not 1"
    );

    let started = Instant::now();
    let results = run_duplicate_detection(&index, &index, &cfg, &UNLIMITED).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let oracle = brute_force_pipeline(&index, &cfg);

    let got: BTreeMap<(String, String), (f64, bool)> =
        results.iter().map(|p| (p.key(), (p.similarity, p.accepted))).collect();
    ensure!(got.len() == results.len(), "duplicate pairs in the results");
    let got_keys: BTreeSet<_> = got.keys().collect();
    let want_keys: BTreeSet<_> = oracle.keys().collect();
    ensure!(
        got_keys == want_keys,
        "candidate sets differ: {} vs {} pairs",
        got_keys.len(),
        want_keys.len()
    );
    for (key, (sim, _)) in &got {
        let (want, _) = oracle[key];
        ensure!((sim - want).abs() < 1e-12, "{key:?}: similarity {sim} vs {want}");
    }
    let accepted = |m: &BTreeMap<(String, String), (f64, bool)>| -> BTreeSet<(String, String)> {
        m.iter().filter(|(_, (_, a))| *a).map(|(k, _)| k.clone()).collect()
    };
    let (got_acc, want_acc) = (accepted(&got), accepted(&oracle));
    ensure!(
        got_acc == want_acc,
        "accepted sets differ: {} vs {}",
        got_acc.len(),
        want_acc.len()
    );
    ensure!(!got_acc.is_empty(), "nothing accepted; the comparison is vacuous");
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!(
        "{} candidates, {} accepted, identical to all pairs ({} ms)",
        got.len(),
        got_acc.len(),
        elapsed.as_millis()
    ))
}

/// The two-event example yields its single pair with the expected path modes.
pub fn running_example() -> Check {
    let index = running_example_index();
    let spec = index.spec();
    let cfg = default_config(spec, spec, &IgnoreList::default(), false).map_err(|e| e.to_string())?;
    ensure!(
        cfg.pre_filter.threshold_pct == 40,
        "pre-filter pct {}",
        cfg.pre_filter.threshold_pct
    );
    ensure!(
        cfg.decision.threshold == Hundredths::new(75).unwrap(),
        "threshold {:?}",
        cfg.decision.threshold
    );
    ensure!(
        cfg.comparison.paths.values().all(|p| p.weight == Hundredths::ONE),
        "weights are not all 1"
    );
    let name_cfg = cfg.comparison.paths.get("name").ok_or("no name path")?;
    ensure!(
        name_cfg.aggregation == Aggregation::Max,
        "name aggregation {:?}",
        name_cfg.aggregation
    );

    let results = run_duplicate_detection(&index, &index, &cfg, &RunOptions::default()).map_err(|e| e.to_string())?;
    ensure!(results.len() == 1, "{} candidate pairs", results.len());
    let pair = &results[0];
    ensure!(
        pair.key() == pair_key(ENTITY_1234, ENTITY_5678),
        "pair {:?}",
        pair.key()
    );
    ensure!(pair.accepted, "pair rejected at similarity {}", pair.similarity);

    let address = pair.per_path.get("address").ok_or("no address score")?;
    ensure!(address.mode == PathMode::Serialized, "address mode {:?}", address.mode);
    let a = apply_plan(index.get(ENTITY_1234).unwrap(), &cfg.plan);
    let b = apply_plan(index.get(ENTITY_5678).unwrap(), &cfg.plan);
    // 1234 holds a nested address, 5678 a literal one.
    let sa = serialize_fields(&a, "address");
    let sb = b.get("address").ok_or("5678 has no address")?[0].canonical();
    ensure!(
        !sa.is_empty() && serialize_fields(&b, "address").is_empty(),
        "address shapes differ from the fixture"
    );
    let longest = sa.chars().count().max(sb.chars().count());
    let expected = 1.0 - levenshtein_dp(&sa, &sb) as f64 / longest as f64;
    ensure!(
        address.similarity.is_some_and(|s| (s - expected).abs() < 1e-12),
        "address similarity {:?}, serialization oracle {expected}",
        address.similarity
    );

    let name = pair.per_path.get("name").ok_or("no name score")?;
    ensure!(name.mode == PathMode::Literal, "name mode {:?}", name.mode);
    let names = |d: &kgdedup::FlatDocument| -> Vec<String> {
        d.get("name").unwrap_or(&[]).iter().map(|v| v.canonical()).collect()
    };
    let best = names(&a)
        .iter()
        .flat_map(|x| names(&b).into_iter().map(move |y| (x.clone(), y)))
        .map(|(x, y)| 1.0 - levenshtein_dp(&x, &y) as f64 / x.chars().count().max(y.chars().count()).max(1) as f64)
        .fold(0.0, f64::max);
    ensure!(
        name.similarity.is_some_and(|s| (s - best).abs() < 1e-12),
        "name similarity {:?}, max over value pairs {best}",
        name.similarity
    );
    Ok(format!(
        "sole pair 1234/5678 at {:.4}; address {:?} {:.4}, name {:?} (max) {:.4}",
        pair.similarity,
        address.mode,
        address.similarity.unwrap_or_default(),
        name.mode,
        name.similarity.unwrap_or_default()
    ))
}

pub fn property_suites() -> Check {
    let mut total = 0;
    let suites = props::suites();
    for (name, suite) in &suites {
        let cases = suite().map_err(|e| format!("{name}: {e}"))?;
        ensure!(cases >= 200, "{name}: only {cases} cases");
        total += cases;
    }
    Ok(format!("{} suites, {total} cases, no violations", suites.len()))
}

/// Every labelled pair of an index scored without pre-filtering.
fn all_pairs_report(index: &TypeIndex, cfg: &DDConfig, labels: &LabelSet) -> MetricsReport {
    let docs: Vec<_> = index.documents().map(|d| apply_plan(d, &cfg.plan)).collect();
    let mut accepted = BTreeSet::new();
    for i in 0..docs.len() {
        for j in i + 1..docs.len() {
            let pair = compare_instances(&docs[i], &docs[j], &cfg.comparison);
            if decide(&pair, &cfg.decision) {
                accepted.insert(pair_key(&docs[i].id, &docs[j].id));
            }
        }
    }
    analyze_accepted(&accepted, labels)
}

fn with_weights(cfg: &DDConfig, selected: &BTreeSet<&str>) -> DDConfig {
    let mut out = cfg.clone();
    for (path, pc) in out.comparison.paths.iter_mut() {
        pc.weight = if selected.contains(path.as_str()) {
            Hundredths::ONE
        } else {
            Hundredths::ZERO
        };
    }
    out
}

fn selection_soundness() -> Result<String, String> {
    let (index, labels, cfg) = selection_fixture();
    let prefs = MetricPrefs::default();
    let paths: Vec<&str> = cfg.comparison.paths.keys().map(String::as_str).collect();
    let mut tier: Vec<(BTreeSet<&str>, MetricsReport)> = Vec::new();
    for mask in 1u32..(1 << paths.len()) {
        let subset: BTreeSet<&str> = (0..paths.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| paths[i])
            .collect();
        let report = all_pairs_report(&index, &with_weights(&cfg, &subset), &labels);
        tier.push((subset, report));
    }
    let best = tier
        .iter()
        .map(|(_, r)| r)
        .fold(None::<&MetricsReport>, |b, r| match b {
            Some(b) if !better_than(r, b, &prefs) => Some(b),
            _ => Some(r),
        })
        .ok_or("no subsets")?
        .clone();
    let optimal: Vec<String> = tier
        .iter()
        .filter(|(_, r)| !better_than(&best, r, &prefs))
        .map(|(s, _)| s.iter().copied().collect::<Vec<_>>().join("+"))
        .collect();
    ensure!(
        best.f1 < 1.0 || optimal.len() < tier.len(),
        "every subset is optimal; the fixture is vacuous"
    );

    for (name, forward) in [("forward_selection", true), ("backward_elimination", false)] {
        let mut ctx = SearchContext::new(&index, &index, labels.clone(), prefs, UNLIMITED);
        let out = if forward {
            forward_selection(&mut ctx, &cfg, SelectionTarget::Weights, None)
        } else {
            backward_elimination(&mut ctx, &cfg, SelectionTarget::Weights, None)
        }
        .map_err(|e| format!("{name}: {e}"))?;
        let oracle = all_pairs_report(&index, &out.config, &labels);
        ensure!(
            oracle == out.report,
            "{name}: reported {:?}, recomputed {oracle:?}",
            out.report
        );
        ensure!(
            !better_than(&best, &out.report, &prefs),
            "{name}: f1 {:.3} is outside the optimal tier (f1 {:.3})",
            out.report.f1,
            best.f1
        );
    }
    Ok(format!(
        "selection in the optimal tier {{{}}} at f1 {:.3}",
        optimal.join(", "),
        best.f1
    ))
}

fn sweep_soundness() -> Result<String, String> {
    let (index, labels, cfg) = sweep_fixture();
    let prefs = MetricPrefs::default();
    // Similarities straight from the documents, independent of the engine.
    let sims: Vec<(f64, bool)> = labels
        .iter()
        .map(|((a, b), dup)| {
            let va = index.get(a).unwrap().get("code").unwrap()[0].canonical();
            let vb = index.get(b).unwrap().get("code").unwrap()[0].canonical();
            (1.0 - levenshtein_dp(&va, &vb) as f64 / 40.0, dup)
        })
        .collect();
    let f1_at = |t: f64| {
        let tp = sims.iter().filter(|(s, d)| *s > t && *d).count() as f64;
        let fp = sims.iter().filter(|(s, d)| *s > t && !*d).count() as f64;
        let fn_ = sims.iter().filter(|(s, d)| *s <= t && *d).count() as f64;
        let p = if tp + fp == 0.0 { 1.0 } else { tp / (tp + fp) };
        let r = if tp + fn_ == 0.0 { 1.0 } else { tp / (tp + fn_) };
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    };
    let grid: Vec<u8> = (0..=100).step_by(5).collect();
    let curve: Vec<f64> = grid.iter().map(|&t| f1_at(f64::from(t) / 100.0)).collect();
    let peak = (0..curve.len())
        .max_by(|&i, &j| curve[i].total_cmp(&curve[j]).then(j.cmp(&i)))
        .unwrap();
    ensure!(
        curve[..peak].windows(2).all(|w| w[0] <= w[1]) && curve[peak..].windows(2).all(|w| w[0] >= w[1]),
        "the sweep is not unimodal: {curve:?}"
    );
    ensure!(
        curve.iter().filter(|&&f| f == curve[peak]).count() == 1,
        "the sweep optimum is not unique"
    );
    let optimum = grid[peak];
    for start in [75u8, 30, 100] {
        let mut from = cfg.clone();
        from.decision.threshold = Hundredths::new(start).unwrap();
        let mut ctx = SearchContext::new(&index, &index, labels.clone(), prefs, UNLIMITED);
        let out = hill_climb(&mut ctx, &from, &NumericParam::DecisionThreshold, 5, 40).map_err(|e| e.to_string())?;
        let got = out.config.decision.threshold.get();
        ensure!(
            got == optimum,
            "hill_climb from {start}: {got}, sweep optimum {optimum}"
        );
    }
    Ok(format!(
        "hill_climb reaches the sweep optimum {:.2} from 0.30, 0.75 and 1.00",
        f64::from(optimum) / 100.0
    ))
}

/// Every candidate pair of a bootstrap run, labelled from the ground truth.
fn closed_world_labels(index: &TypeIndex, truth: &LabelSet) -> Result<LabelSet, String> {
    let spec = index.spec();
    let cfg = default_config(spec, spec, &IgnoreList::default(), true).map_err(|e| e.to_string())?;
    let results = run_duplicate_detection(index, index, &cfg, &RunOptions::default()).map_err(|e| e.to_string())?;
    let mut labels = LabelSet::new();
    for p in &results {
        labels.insert(
            &p.source_id,
            &p.target_id,
            truth.get(&p.source_id, &p.target_id).unwrap_or(false),
        );
    }
    Ok(labels)
}

fn genetic_reproducibility() -> Result<String, String> {
    let (data, index) = synth_index(120, 3);
    let labels = closed_world_labels(&index, &data.truth)?;
    let spec = index.spec();
    let cfg = default_config(spec, spec, &IgnoreList::default(), false).map_err(|e| e.to_string())?;
    let opts = GeneticOptions {
        population: 8,
        generations: 6,
        mutation_prob: 0.2,
        seed: 11,
    };
    let run = |opts: &GeneticOptions| -> Result<(DDConfig, Vec<String>), String> {
        let mut ctx = SearchContext::new(
            &index,
            &index,
            labels.clone(),
            MetricPrefs::default(),
            RunOptions::default(),
        );
        let out = genetic_search(&mut ctx, &cfg, FunctionTarget::Comparators, opts).map_err(|e| e.to_string())?;
        Ok((out.config, ctx.audit().iter().map(|e| e.config_hash.clone()).collect()))
    };
    let (c1, h1) = run(&opts)?;
    let (c2, h2) = run(&opts)?;
    ensure!(c1 == c2, "same seed, different configurations");
    ensure!(c1.to_json() == c2.to_json(), "same seed, different serializations");
    ensure!(h1 == h2, "same seed, different evaluation sequences");
    let (_, other) = run(&GeneticOptions { seed: 12, ..opts })?;
    ensure!(other != h1, "seeds 11 and 12 evaluate identical sequences");
    Ok(format!("genetic search reproducible over {} evaluations", h1.len()))
}

pub fn heuristic_soundness() -> Check {
    let selection = selection_soundness()?;
    let sweep = sweep_soundness()?;
    let genetic = genetic_reproducibility()?;
    Ok(format!("{selection}; {sweep}; {genetic}"))
}

pub fn end_to_end_steps() -> Vec<StrategyStep> {
    vec![
        StrategyStep::new(Heuristic::ForwardSelection, StepTarget::Weights),
        StrategyStep::hill_climb(StepTarget::DecisionThreshold, 0.05),
        StrategyStep::genetic(StepTarget::Comparators, 8, 10, 7),
    ]
}

/// Active learning on 500 synthetic instances reaches F1 0.8 within five rounds.
pub fn end_to_end() -> Check {
    let started = Instant::now();
    let (data, index) = synth_index(500, 7);
    let opts = SimulationOptions {
        rounds: 5,
        labels_per_round: 20,
        steps: end_to_end_steps(),
        stop_at_f1: Some(0.8),
        ..SimulationOptions::default()
    };
    let rounds = simulate_active_learning(&index, &data.truth, &opts).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let trace: Vec<String> = rounds.iter().map(|r| format!("{:.3}", r.truth.f1)).collect();
    let reached = rounds.iter().find(|r| r.truth.f1 >= 0.8);
    ensure!(
        rounds.iter().all(|r| r.strategy_error.is_none()),
        "a strategy step failed"
    );
    let Some(round) = reached else {
        return Err(format!("F1 per round [{}] never reaches 0.8", trace.join(", ")));
    };
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!(
        "F1 {:.3} in round {} with {} labels (per round [{}]), {:.1} s",
        round.truth.f1,
        round.round,
        round.labelled,
        trace.join(", "),
        elapsed.as_secs_f64()
    ))
}

fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(dir: &Path, root: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(&path, root, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn ws_err(e: WorkspaceError) -> String {
    e.to_string()
}

pub fn service_durability() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path().join("state");
    let data = kgdedup::synth::synth(&kgdedup::synth::SynthOptions {
        instances: 40,
        seed: 5,
        ..Default::default()
    });
    let (labels, version, config) = {
        let mut ws = Workspace::open(&root, WorkspaceOptions::default()).map_err(ws_err)?;
        let g = ws.add_graph("synth", &data.ntriples()).map_err(ws_err)?;
        let i = ws
            .create_index(&g.id, EVENT_TYPE, SpecSource::Emergent, None, 1)
            .map_err(ws_err)?;
        let p = ws.create_pair(&i.id, &i.id).map_err(ws_err)?;
        ws.run_now(&p.id).map_err(ws_err)?;
        let queue = ws.next_labels(&p.id, 3).map_err(ws_err)?;
        ensure!(queue.len() == 3, "labelling queue holds {} pairs", queue.len());
        for pair in &queue {
            let dup = data.truth.get(&pair.source_id, &pair.target_id).unwrap_or(false);
            ws.record_label(&p.id, &pair.source_id, &pair.target_id, dup)
                .map_err(ws_err)?;
        }
        let mut cfg = ws.pair(&p.id).map_err(ws_err)?.config.clone();
        cfg.decision.threshold = Hundredths::new(81).unwrap();
        let info = ws.set_config(&p.id, cfg).map_err(ws_err)?;
        (ws.labels(&p.id).map_err(ws_err)?.len(), info.version, info.config)
    };

    let ws = Workspace::open(&root, WorkspaceOptions::default()).map_err(ws_err)?;
    let restored = ws.pair("p1").map_err(ws_err)?;
    let restored_labels = ws.labels("p1").map_err(ws_err)?.len();
    ensure!(
        restored_labels == labels,
        "{restored_labels} labels restored, {labels} recorded"
    );
    ensure!(
        restored.version == version,
        "version {} restored, {version} stored",
        restored.version
    );
    ensure!(restored.config == config, "restored configuration differs");

    ws.persist().map_err(ws_err)?;
    let first = snapshot(&root);
    drop(ws);
    let ws = Workspace::open(&root, WorkspaceOptions::default()).map_err(ws_err)?;
    ws.persist().map_err(ws_err)?;
    let second = snapshot(&root);
    ensure!(first.keys().eq(second.keys()), "file sets differ after a round trip");
    for (path, bytes) in &first {
        ensure!(second[path] == *bytes, "{path} changed after persist, restore, persist");
    }
    Ok(format!(
        "{labels} labels and config version {version} restored; {} files byte-identical after a round trip",
        first.len()
    ))
}

pub fn parser_corpus() -> Check {
    let (positives, negatives) = check_corpus()?;
    ensure!(positives >= 30, "only {positives} positive cases");
    ensure!(negatives >= 15, "only {negatives} negative cases");
    Ok(format!("{positives} positive and {negatives} negative cases"))
}

pub type Criterion = (&'static str, fn() -> Check);

pub fn all() -> Vec<Criterion> {
    vec![
        ("oracle equivalence", oracle_equivalence),
        ("running example reproduction", running_example),
        ("property suites", property_suites),
        ("heuristic soundness", heuristic_soundness),
        ("end-to-end learning benchmark", end_to_end),
        ("service durability", service_durability),
        ("parser corpus", parser_corpus),
    ]
}
