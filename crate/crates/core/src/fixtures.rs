//! The two-event running example used throughout the docs and examples.

use crate::index::TypeIndex;
use crate::kg::Graph;
use crate::ntriples::parse_ntriples;
use crate::schema::{extract_domain_spec, DatatypeTable, MinimalDomainSpec};

pub const RUNNING_EXAMPLE_NT: &str = include_str!("../data/running_example.nt");
pub const RUNNING_EXAMPLE_SHAPES_NT: &str = include_str!("../data/running_example_shapes.nt");

pub const EVENT_TYPE: &str = "https://schema.org/Event";
pub const EVENT_SHAPE: &str = "https://example.org/ds/EventShape";
pub const ENTITY_1234: &str = "https://example.org/dzt-entity/1234";
pub const ENTITY_5678: &str = "https://example.org/dzt-entity/5678";

pub fn running_example_graph() -> Graph {
    parse_ntriples(RUNNING_EXAMPLE_NT).expect("bundled fixture parses")
}

pub fn running_example_shapes() -> Graph {
    parse_ntriples(RUNNING_EXAMPLE_SHAPES_NT).expect("bundled fixture parses")
}

/// The event spec at depth 1.
pub fn running_example_spec() -> MinimalDomainSpec {
    extract_domain_spec(&running_example_shapes(), EVENT_SHAPE, 1, &DatatypeTable::default())
        .expect("bundled shape is valid")
}

pub fn running_example_index() -> TypeIndex {
    TypeIndex::build(&running_example_graph(), running_example_spec())
}
