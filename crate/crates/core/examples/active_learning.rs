//! Simulated active learning on a synthetic event graph: an oracle labels the
//! most uncertain pairs each round and a search strategy tunes the configuration.
//!
//! cargo run --release --example active_learning -- [instances] [seed]

use kgdedup::learn::{simulate_active_learning, Heuristic, SimulationOptions, StepTarget, StrategyStep};
use kgdedup::schema::{infer_emergent_schema, DatatypeTable};
use kgdedup::synth::{synth, SynthOptions};
use kgdedup::TypeIndex;

fn main() {
    let mut args = std::env::args().skip(1);
    let instances = args.next().and_then(|a| a.parse().ok()).unwrap_or(500);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(7);

    let data = synth(&SynthOptions {
        instances,
        dup_rate: 0.1,
        seed,
        ..Default::default()
    });
    let spec = infer_emergent_schema(&data.graph, "https://schema.org/Event", 1, &DatatypeTable::default())
        .expect("events present");
    let index = TypeIndex::build(&data.graph, spec);

    let opts = SimulationOptions {
        steps: vec![
            StrategyStep::new(Heuristic::ForwardSelection, StepTarget::Weights),
            StrategyStep::hill_climb(StepTarget::DecisionThreshold, 0.05),
            StrategyStep::genetic(StepTarget::Comparators, 8, 10, seed),
        ],
        ..Default::default()
    };
    let started = std::time::Instant::now();
    let rounds = simulate_active_learning(&index, &data.truth, &opts).expect("simulation runs");
    for r in &rounds {
        println!(
            "round {}: {} labels, {} evaluations, threshold {}, truth p={:.3} r={:.3} f1={:.3}",
            r.round,
            r.labelled,
            r.evaluations,
            r.config.decision.threshold,
            r.truth.precision,
            r.truth.recall,
            r.truth.f1
        );
    }
    if let Some(last) = rounds.last() {
        println!(
            "final comparison: {}",
            serde_json::to_string(&last.config.comparison).unwrap()
        );
    }
    println!("elapsed {:.2?}", started.elapsed());
}
