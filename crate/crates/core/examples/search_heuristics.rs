//! Each search heuristic on its own, starting from the default configuration
//! with ground-truth labels on every bootstrap candidate.
//!
//! cargo run --release --example search_heuristics

use kgdedup::learn::{
    backward_elimination, brute_force, default_config, forward_selection, genetic_search, hill_climb, BruteForceTarget,
    FunctionTarget, GeneticOptions, IgnoreList, LabelSet, MetricPrefs, NumericParam, SearchContext, SearchOutcome,
    SelectionTarget,
};
use kgdedup::synth::{synth, SynthOptions};
use kgdedup::{infer_emergent_schema, run_duplicate_detection, DatatypeTable, RunOptions, TypeIndex};

fn report(name: &str, ctx: &SearchContext, out: &SearchOutcome) {
    let weights: Vec<String> = out
        .config
        .comparison
        .weighted_paths()
        .map(|(p, pc)| format!("{p}={}", pc.weight))
        .collect();
    println!(
        "{name:<22} f1 {:.3}  p {:.3}  r {:.3}  threshold {}  weights [{}]  ({} evaluations so far)",
        out.report.f1,
        out.report.precision,
        out.report.recall,
        out.config.decision.threshold,
        weights.join(", "),
        ctx.audit().len()
    );
}

fn main() {
    let data = synth(&SynthOptions {
        instances: 200,
        seed: 3,
        ..Default::default()
    });
    let spec = infer_emergent_schema(&data.graph, "https://schema.org/Event", 1, &DatatypeTable::default())
        .expect("events present");
    let index = TypeIndex::build(&data.graph, spec);
    let bootstrap = default_config(index.spec(), index.spec(), &IgnoreList::default(), true).expect("valid");
    let mut labels = LabelSet::new();
    for p in run_duplicate_detection(&index, &index, &bootstrap, &RunOptions::default()).expect("valid") {
        labels.insert(
            &p.source_id,
            &p.target_id,
            data.truth.get(&p.source_id, &p.target_id).unwrap_or(false),
        );
    }
    println!("{} labels, {} duplicates", labels.len(), labels.positives());

    let cfg = default_config(index.spec(), index.spec(), &IgnoreList::default(), false).expect("valid");
    let mut ctx = SearchContext::new(&index, &index, labels, MetricPrefs::default(), RunOptions::default());
    let start = ctx.evaluate(&cfg).expect("valid");
    println!("{:<22} f1 {:.3}", "start", start.f1);

    let out = forward_selection(&mut ctx, &cfg, SelectionTarget::Weights, None).expect("runs");
    report("forward selection", &ctx, &out);
    let out = backward_elimination(&mut ctx, &cfg, SelectionTarget::Weights, None).expect("runs");
    report("backward elimination", &ctx, &out);
    let out = hill_climb(&mut ctx, &cfg, &NumericParam::DecisionThreshold, 5, 40).expect("runs");
    report("hill climb threshold", &ctx, &out);
    let out = brute_force(&mut ctx, &cfg, BruteForceTarget::DecisionThreshold).expect("runs");
    report("brute force threshold", &ctx, &out);
    let opts = GeneticOptions {
        seed: 7,
        ..Default::default()
    };
    let out = genetic_search(&mut ctx, &cfg, FunctionTarget::Comparators, &opts).expect("runs");
    report("genetic comparators", &ctx, &out);
}
