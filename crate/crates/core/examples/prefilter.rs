//! More-like-this pre-filtering: how the match threshold trades candidate count
//! against recall of the true duplicates on a synthetic graph.
//!
//! cargo run --release --example prefilter

use kgdedup::compare::candidate_pairs;
use kgdedup::learn::{default_config, IgnoreList};
use kgdedup::synth::{synth, SynthOptions};
use kgdedup::{infer_emergent_schema, DatatypeTable, RunOptions, TypeIndex};

fn main() {
    let data = synth(&SynthOptions {
        instances: 300,
        seed: 1,
        ..Default::default()
    });
    let spec = infer_emergent_schema(&data.graph, "https://schema.org/Event", 1, &DatatypeTable::default())
        .expect("events present");
    let index = TypeIndex::build(&data.graph, spec);
    let mut cfg = default_config(index.spec(), index.spec(), &IgnoreList::default(), false).expect("valid");
    println!(
        "{} instances, {} true duplicate pairs",
        index.len(),
        data.truth.positives()
    );
    println!("{:>4} {:>10} {:>10}", "pct", "candidates", "dups kept");
    for pct in [0, 10, 20, 40, 60, 80, 100] {
        cfg.pre_filter.threshold_pct = pct;
        let pairs = candidate_pairs(&index, &index, &cfg.pre_filter, &RunOptions { candidate_limit: None })
            .expect("valid pre-filter");
        let kept = pairs.iter().filter(|(a, b)| data.truth.get(a, b) == Some(true)).count();
        println!("{pct:>4} {:>10} {kept:>10}", pairs.len());
    }
}
