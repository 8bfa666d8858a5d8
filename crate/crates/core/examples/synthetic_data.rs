//! Generates a synthetic event graph with known duplicates and writes the
//! N-Triples and ground-truth CSV to stdout.
//!
//! cargo run --example synthetic_data -- [instances] [seed] > events.nt

use kgdedup::synth::{synth, SynthOptions};

fn main() {
    let mut args = std::env::args().skip(1);
    let opts = SynthOptions {
        instances: args.next().and_then(|a| a.parse().ok()).unwrap_or(20),
        seed: args.next().and_then(|a| a.parse().ok()).unwrap_or(7),
        ..Default::default()
    };
    let data = synth(&opts);
    print!("{}", data.ntriples());
    eprintln!(
        "{} triples, {} duplicate pairs",
        data.graph.len(),
        data.truth.positives()
    );
    eprint!("{}", data.truth_csv());
}
