//! Fixtures and independent oracles.

use std::collections::{BTreeMap, BTreeSet};

use kgdedup::compare::{pair_key, ComparisonConfig, DecisionConfig, PathComparison};
use kgdedup::fixtures::EVENT_TYPE;
use kgdedup::index::PreFilterConfig;
use kgdedup::kg::PropertyPath;
use kgdedup::learn::LabelSet;
use kgdedup::schema::{infer_emergent_schema, DatatypeCategory, DatatypeTable, MinimalDomainSpec, PropertySpec};
use kgdedup::synth::{synth, SynthOptions, SynthOutput};
use kgdedup::{
    apply_plan, compare_instances, decide, Aggregation, Comparator, DDConfig, FlatDocument, FlatValue, Hundredths,
    StandardizationPlan, TypeIndex,
};

pub fn synth_index(instances: usize, seed: u64) -> (SynthOutput, TypeIndex) {
    let data = synth(&SynthOptions {
        instances,
        seed,
        ..SynthOptions::default()
    });
    let spec = infer_emergent_schema(&data.graph, EVENT_TYPE, 1, &DatatypeTable::default()).expect("events present");
    let index = TypeIndex::build(&data.graph, spec);
    (data, index)
}

/// A spec of single-valued top-level string fields.
pub fn text_spec(fields: &[&str]) -> MinimalDomainSpec {
    MinimalDomainSpec {
        type_iri: "https://example.org/T".into(),
        properties: fields
            .iter()
            .map(|f| PropertySpec {
                path: PropertyPath::single(format!("https://example.org/p/{f}")),
                field: f.to_string(),
                multi_valued: false,
                category: DatatypeCategory::String,
                is_nested_instance: false,
            })
            .collect(),
        depth: 1,
        warnings: Vec::new(),
    }
}

pub fn text_doc(id: &str, fields: &[(&str, &str)]) -> FlatDocument {
    fields.iter().fold(FlatDocument::new(id), |d, (f, v)| {
        d.with(f, vec![FlatValue::Text(v.to_string())])
    })
}

/// Levenshtein on every field, weight 1, no standardization, every document a
/// candidate (pre-filter threshold 0).
pub fn plain_config(fields: &[&str], threshold: u8) -> DDConfig {
    DDConfig {
        pre_filter: PreFilterConfig::new(fields.iter().map(|f| f.to_string()).collect(), 0),
        plan: StandardizationPlan::new(),
        comparison: ComparisonConfig {
            paths: fields
                .iter()
                .map(|f| {
                    (
                        f.to_string(),
                        PathComparison {
                            comparator: Comparator::Levenshtein,
                            aggregation: Aggregation::Max,
                            weight: Hundredths::ONE,
                        },
                    )
                })
                .collect(),
        },
        decision: DecisionConfig {
            threshold: Hundredths::new(threshold).expect("threshold in range"),
        },
    }
}

/// Three properties: `name` (informative, but some distinct events share a
/// name), `city` (disambiguates same-named events) and `noise` (random).
/// Every pair is labelled.
pub fn selection_fixture() -> (TypeIndex, LabelSet, DDConfig) {
    let events = [
        ("Jazz Night", "Jazz Nigth", "Berlin"),
        ("Jazz Night", "Jazz Nite", "Munich"),
        ("Rock Festival", "Rock Festivl", "Berlin"),
        ("Rock Festival", "Rock Festval", "Hamburg"),
        ("Open Air Cinema", "Open Air Cinemas", "Munich"),
        ("Wine Tasting", "Wine Tastin", "Hamburg"),
        ("Poetry Slam", "Poetry Slams", "Berlin"),
        ("Poetry Slam", "Poetry Slamm", "Cologne"),
    ];
    let noise = |i: usize| format!("{:08x}", (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 32);
    let mut docs = Vec::new();
    let mut labels = LabelSet::new();
    for (i, (name, variant, city)) in events.iter().enumerate() {
        let a = format!("e{i}a");
        let b = format!("e{i}b");
        docs.push(text_doc(
            &a,
            &[("name", name), ("city", city), ("noise", &noise(2 * i))],
        ));
        docs.push(text_doc(
            &b,
            &[("name", variant), ("city", city), ("noise", &noise(2 * i + 1))],
        ));
    }
    let ids: Vec<String> = docs.iter().map(|d| d.id.clone()).collect();
    for (i, x) in ids.iter().enumerate() {
        for y in &ids[i + 1..] {
            let same = x[..x.len() - 1] == y[..y.len() - 1];
            labels.insert(x, y, same);
        }
    }
    let fields = ["city", "name", "noise"];
    let index = TypeIndex::from_documents(text_spec(&fields), docs);
    (index, labels, plain_config(&fields, 75))
}

/// One field; the labelled pairs sit at similarities 0.025, 0.075, ..., 0.975.
/// The 7 pairs above 0.65 are duplicates and the 13 below are not, so over
/// the 0.05 grid the F1 of a threshold sweep peaks strictly at 0.65.
pub fn sweep_fixture() -> (TypeIndex, LabelSet, DDConfig) {
    let base = "x".repeat(40);
    let mut docs = Vec::new();
    let mut labels = LabelSet::new();
    for (i, k) in (1..40).step_by(2).enumerate() {
        let variant = format!("{}{}", "y".repeat(k), &base[k..]);
        let (a, b) = (format!("s{i:02}a"), format!("s{i:02}b"));
        docs.push(text_doc(&a, &[("code", &base)]));
        docs.push(text_doc(&b, &[("code", &variant)]));
        labels.insert(&a, &b, k < 14);
    }
    let index = TypeIndex::from_documents(text_spec(&["code"]), docs);
    (index, labels, plain_config(&["code"], 75))
}

/// Classic dynamic-programming edit distance over Unicode scalar values.
pub fn levenshtein_dp(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for i in 1..=a.len() {
        let mut row = vec![i; b.len() + 1];
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            row[j] = sub.min(prev[j] + 1).min(row[j - 1] + 1);
        }
        prev = row;
    }
    prev[b.len()]
}

/// The terms a document offers on `fields`, computed without the index.
fn doc_terms(doc: &FlatDocument, fields: &[String]) -> BTreeSet<String> {
    fields
        .iter()
        .flat_map(|f| doc.get(f).unwrap_or(&[]))
        .flat_map(FlatValue::terms)
        .collect()
}

/// All-pairs pipeline for a self-join with a required match count of 1: every
/// unordered pair sharing at least one pre-filter term is standardized,
/// compared and decided. Returns candidate keys with (similarity, accepted).
pub fn brute_force_pipeline(index: &TypeIndex, cfg: &DDConfig) -> BTreeMap<(String, String), (f64, bool)> {
    let docs: Vec<&FlatDocument> = index.documents().collect();
    let terms: Vec<BTreeSet<String>> = docs.iter().map(|d| doc_terms(d, &cfg.pre_filter.properties)).collect();
    let mut out = BTreeMap::new();
    for i in 0..docs.len() {
        for j in i + 1..docs.len() {
            if terms[i].is_disjoint(&terms[j]) {
                continue;
            }
            let pair = compare_instances(
                &apply_plan(docs[i], &cfg.plan),
                &apply_plan(docs[j], &cfg.plan),
                &cfg.comparison,
            );
            let accepted = decide(&pair, &cfg.decision);
            out.insert(pair_key(&docs[i].id, &docs[j].id), (pair.similarity, accepted));
        }
    }
    out
}

pub fn max_sample_terms(index: &TypeIndex, fields: &[String]) -> usize {
    index.documents().map(|d| doc_terms(d, fields).len()).max().unwrap_or(0)
}
