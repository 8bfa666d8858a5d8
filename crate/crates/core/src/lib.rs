//! Embedded duplicate detection for knowledge graphs.
//!
//! The pipeline runs in three phases:
//!
//! 1. **Pre-processing**: parse N-Triples into a [`Graph`], derive a
//!    [`MinimalDomainSpec`] from a SHACL-style shape or from the data, and
//!    flatten every instance of a type into a [`TypeIndex`].
//! 2. **Duplicate detection**: pre-filter candidates with a more-like-this
//!    query, standardize values, compare property paths and decide with a
//!    similarity threshold ([`run_duplicate_detection`]).
//! 3. **Active learning**: collect pair labels, measure precision, recall and
//!    F1, and search the configuration space with forward selection, backward
//!    elimination, hill climbing, brute force and a genetic algorithm
//!    ([`learn`]).
//!
//! [`workspace::Workspace`] persists graphs, indices, configurations and labels
//! in a state directory and backs both the HTTP service and the CLI.

pub mod compare;
pub mod fixtures;
pub mod index;
pub mod kg;
pub mod learn;
pub mod ntriples;
pub mod schema;
pub mod standardize;
pub mod synth;
pub mod vocab;
pub mod workspace;

pub use compare::{
    compare_instances, compare_literal, compare_path, decide, run_duplicate_detection, serialize_fields, Aggregation,
    Comparator, ComparisonConfig, DDConfig, DecisionConfig, Hundredths, PathComparison, PathMode, PathScore,
    RunOptions, ScoredPair,
};
pub use index::{flatten, tokenize, FlatDocument, FlatValue, PreFilterConfig, TypeIndex};
pub use kg::{Graph, Literal, PropertyPath, Term, Triple};
pub use ntriples::{parse_ntriples, ParseError};
pub use schema::{
    categorize_datatype, extract_domain_spec, infer_emergent_schema, DatatypeCategory, DatatypeTable,
    MinimalDomainSpec, PropertySpec,
};
pub use standardize::{apply_plan, standardize_list, standardize_value, StandardizationPlan, Standardizer};
