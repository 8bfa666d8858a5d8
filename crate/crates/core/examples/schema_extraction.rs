//! Derives a domain spec twice, once from a SHACL-style shape and once from the
//! data alone, and prints both side by side.
//!
//! cargo run --example schema_extraction -- [depth]

use kgdedup::fixtures::{running_example_graph, running_example_shapes, EVENT_SHAPE, EVENT_TYPE};
use kgdedup::{extract_domain_spec, infer_emergent_schema, DatatypeTable, MinimalDomainSpec};

fn show(title: &str, spec: &MinimalDomainSpec) {
    println!("{title} ({} at depth {}):", spec.type_iri, spec.depth);
    for p in &spec.properties {
        println!(
            "  {:<26} {:<10} multi={:<5} nested={}",
            p.field, p.category, p.multi_valued, p.is_nested_instance
        );
    }
    for w in &spec.warnings {
        println!("  warning: {w}");
    }
}

fn main() {
    let depth = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1);
    let table = DatatypeTable::default();
    let shaped = extract_domain_spec(&running_example_shapes(), EVENT_SHAPE, depth, &table).expect("shape is valid");
    show("from the shape", &shaped);
    let emergent = infer_emergent_schema(&running_example_graph(), EVENT_TYPE, depth, &table).expect("events present");
    show("from the data", &emergent);
}
