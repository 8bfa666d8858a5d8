//! Deduplicates the two-event running example with the default configuration
//! and prints the per-path breakdown of every scored pair.
//!
//! cargo run --example running_example

use kgdedup::fixtures::running_example_index;
use kgdedup::learn::{default_config, IgnoreList};
use kgdedup::{run_duplicate_detection, RunOptions};

fn main() {
    let index = running_example_index();
    println!("spec fields:");
    for p in &index.spec().properties {
        println!("  {:<24} {:<10} multi={}", p.field, p.category, p.multi_valued);
    }
    let cfg = default_config(index.spec(), index.spec(), &IgnoreList::default(), false).expect("spec matches itself");
    println!("config: {}", cfg.to_json());
    let results = run_duplicate_detection(&index, &index, &cfg, &RunOptions::default()).expect("config is valid");
    for pair in &results {
        println!(
            "{} ~ {}: similarity {:.4}, accepted {}",
            pair.source_id, pair.target_id, pair.similarity, pair.accepted
        );
        for (path, score) in &pair.per_path {
            match score.similarity {
                Some(s) => println!("  {path:<12} {:?} {s:.4}", score.mode),
                None => println!("  {path:<12} {:?}", score.mode),
            }
        }
    }
}
