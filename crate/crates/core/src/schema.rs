//! Minimal domain specifications: which property paths a type has, their
//! cardinality and their datatype category.
//!
//! A spec comes either from a SHACL-style shape (`sh:targetClass`,
//! `sh:property`, `sh:path`, `sh:datatype`, `sh:node`/`sh:class`,
//! `sh:maxCount`) or is inferred from the instance data itself.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::kg::{local_name, Graph, PropertyPath, Term};
use crate::vocab;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("shape <{0}> has no sh:targetClass")]
    MissingTargetClass(String),
    #[error("depth must be at least 1")]
    InvalidDepth,
    #[error("no instances of <{0}>")]
    NoInstances(String),
    #[error("source and target specs do not share the same property paths")]
    PathMismatch,
    #[error("invalid datatype table: {0}")]
    InvalidTable(String),
}

/// Coarse literal categories that decide which standardizers and comparators apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatatypeCategory {
    String,
    Number,
    Boolean,
}

impl fmt::Display for DatatypeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatatypeCategory::String => "dd:String",
            DatatypeCategory::Number => "dd:Number",
            DatatypeCategory::Boolean => "dd:Boolean",
        })
    }
}

impl FromStr for DatatypeCategory {
    type Err = SpecError;

    /// Accepts `string`, `dd:String`, `DdString` and the like, case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let name = lower
            .strip_prefix("dd:")
            .or_else(|| lower.strip_prefix("dd"))
            .unwrap_or(&lower);
        match name {
            "string" => Ok(DatatypeCategory::String),
            "number" => Ok(DatatypeCategory::Number),
            "boolean" => Ok(DatatypeCategory::Boolean),
            _ => Err(SpecError::InvalidTable(format!("unknown category {s:?}"))),
        }
    }
}

const BUILTIN_STRING: &[&str] = &["string", "anyURI", "date", "dateTime", "time", "duration"];
const BUILTIN_NUMBER: &[&str] = &[
    "integer",
    "int",
    "long",
    "short",
    "decimal",
    "float",
    "double",
    "nonNegativeInteger",
];

/// Maps datatype IRIs to categories. Starts from the built-in XSD table and can
/// be extended for graphs that use other datatype labels.
#[derive(Debug, Clone)]
pub struct DatatypeTable {
    entries: HashMap<String, DatatypeCategory>,
}

impl Default for DatatypeTable {
    fn default() -> Self {
        let mut entries = HashMap::new();
        for local in BUILTIN_STRING {
            entries.insert(format!("{}{local}", vocab::XSD), DatatypeCategory::String);
        }
        for local in BUILTIN_NUMBER {
            entries.insert(format!("{}{local}", vocab::XSD), DatatypeCategory::Number);
        }
        entries.insert(vocab::RDF_LANG_STRING.to_string(), DatatypeCategory::String);
        entries.insert(vocab::XSD_BOOLEAN.to_string(), DatatypeCategory::Boolean);
        Self { entries }
    }
}

impl DatatypeTable {
    pub fn insert(&mut self, datatype: impl Into<String>, category: DatatypeCategory) {
        self.entries.insert(datatype.into(), category);
    }

    /// Adds entries from a JSON object mapping datatype IRI to category name.
    /// Prefixed keys such as `xsd:gYear` are expanded.
    pub fn extend_from_json(&mut self, json: &str) -> Result<(), SpecError> {
        let raw: BTreeMap<String, String> =
            serde_json::from_str(json).map_err(|e| SpecError::InvalidTable(e.to_string()))?;
        for (iri, name) in raw {
            self.insert(vocab::expand(&iri), name.parse()?);
        }
        Ok(())
    }

    pub fn lookup(&self, datatype: &str) -> Option<DatatypeCategory> {
        self.entries.get(datatype).copied()
    }

    /// Total: unknown datatypes fall back to [`DatatypeCategory::String`].
    pub fn categorize(&self, datatype: &str) -> DatatypeCategory {
        self.lookup(datatype).unwrap_or_else(|| {
            tracing::warn!(datatype, "unknown datatype, treating as dd:String");
            DatatypeCategory::String
        })
    }
}

/// Categorizes a datatype IRI with the built-in table.
pub fn categorize_datatype(datatype: &str) -> DatatypeCategory {
    DatatypeTable::default().categorize(datatype)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertySpec {
    pub path: PropertyPath,
    /// Canonical dotted field name, unique within the spec.
    pub field: String,
    pub multi_valued: bool,
    pub category: DatatypeCategory,
    pub is_nested_instance: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalDomainSpec {
    pub type_iri: String,
    pub properties: Vec<PropertySpec>,
    pub depth: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl MinimalDomainSpec {
    pub fn property(&self, field: &str) -> Option<&PropertySpec> {
        self.properties.iter().find(|p| p.field == field)
    }

    pub fn has_field(&self, field: &str) -> bool {
        self.property(field).is_some()
    }

    pub fn fields(&self) -> impl Iterator<Item = &str> {
        self.properties.iter().map(|p| p.field.as_str())
    }

    /// Properties attached directly to the instance (path length 1).
    pub fn top_level(&self) -> impl Iterator<Item = &PropertySpec> {
        self.properties.iter().filter(|p| p.path.len() == 1)
    }

    fn finish(type_iri: String, depth: usize, mut drafts: Vec<Draft>, warnings: BTreeSet<String>) -> Self {
        drafts.sort_by(|a, b| a.path.cmp(&b.path));
        drafts.dedup_by(|a, b| a.path == b.path);
        let names = field_names(drafts.iter().map(|d| &d.path));
        let properties = drafts
            .into_iter()
            .map(|d| PropertySpec {
                field: names[&d.path].clone(),
                path: d.path,
                multi_valued: d.multi_valued,
                category: d.category,
                is_nested_instance: d.nested,
            })
            .collect();
        Self {
            type_iri,
            properties,
            depth,
            warnings: warnings.into_iter().collect(),
        }
    }
}

struct Draft {
    path: PropertyPath,
    multi_valued: bool,
    category: DatatypeCategory,
    nested: bool,
}

/// Assigns each path a dotted name. Predicates whose local names collide get
/// `_2`, `_3`, … suffixes in IRI order, so a predicate always maps to the same
/// segment name.
fn field_names<'a>(paths: impl Iterator<Item = &'a PropertyPath>) -> HashMap<PropertyPath, String> {
    let paths: Vec<&PropertyPath> = paths.collect();
    let predicates: BTreeSet<&str> = paths
        .iter()
        .flat_map(|p| p.segments().iter().map(String::as_str))
        .collect();
    let mut taken: HashMap<&str, usize> = HashMap::new();
    let mut segment_name: HashMap<&str, String> = HashMap::new();
    for iri in predicates {
        let base = local_name(iri);
        let n = taken.entry(base).or_insert(0);
        *n += 1;
        let name = if *n == 1 {
            base.to_string()
        } else {
            format!("{base}_{n}")
        };
        segment_name.insert(iri, name);
    }
    paths
        .into_iter()
        .map(|p| {
            let name = p
                .segments()
                .iter()
                .map(|s| segment_name[s.as_str()].as_str())
                .collect::<Vec<_>>()
                .join(".");
            (p.clone(), name)
        })
        .collect()
}

/// Builds a spec from the shape `shape_iri` in `spec_graph`, expanding nested
/// shapes until paths reach `depth + 1` segments.
pub fn extract_domain_spec(
    spec_graph: &Graph,
    shape_iri: &str,
    depth: usize,
    table: &DatatypeTable,
) -> Result<MinimalDomainSpec, SpecError> {
    if depth == 0 {
        return Err(SpecError::InvalidDepth);
    }
    let shape = Term::iri(shape_iri);
    let target = spec_graph
        .objects(&shape, vocab::SH_TARGET_CLASS)
        .find_map(Term::as_iri)
        .ok_or_else(|| SpecError::MissingTargetClass(shape_iri.to_string()))?
        .to_string();
    let mut drafts = Vec::new();
    let mut warnings = BTreeSet::new();
    collect_shape(
        spec_graph,
        &shape,
        None,
        false,
        depth,
        table,
        &mut drafts,
        &mut warnings,
    );
    Ok(MinimalDomainSpec::finish(target, depth, drafts, warnings))
}

#[allow(clippy::too_many_arguments)]
fn collect_shape(
    g: &Graph,
    shape: &Term,
    prefix: Option<&PropertyPath>,
    parent_multi: bool,
    depth: usize,
    table: &DatatypeTable,
    drafts: &mut Vec<Draft>,
    warnings: &mut BTreeSet<String>,
) {
    for prop in g.objects(shape, vocab::SH_PROPERTY) {
        let Some(predicate) = g.objects(prop, vocab::SH_PATH).find_map(Term::as_iri) else {
            warnings.insert(format!("property shape {prop} has no simple sh:path"));
            continue;
        };
        let path = match prefix {
            Some(p) => p.child(predicate),
            None => PropertyPath::single(predicate),
        };
        let max_count = g
            .objects(prop, vocab::SH_MAX_COUNT)
            .find_map(|t| t.as_literal().and_then(|l| l.lexical.trim().parse::<u64>().ok()));
        let multi_valued = parent_multi || max_count.is_none_or(|m| m > 1);

        let node_shape = g.objects(prop, vocab::SH_NODE).find(|t| t.is_resource()).cloned();
        let class = g.objects(prop, vocab::SH_CLASS).find_map(Term::as_iri);
        let nested = node_shape.is_some() || class.is_some();
        let category = if nested {
            DatatypeCategory::String
        } else {
            match g.objects(prop, vocab::SH_DATATYPE).find_map(Term::as_iri) {
                Some(dt) => {
                    if table.lookup(dt).is_none() {
                        warnings.insert(format!("unknown datatype <{dt}> mapped to dd:String"));
                    }
                    table.categorize(dt)
                }
                None => DatatypeCategory::String,
            }
        };
        drafts.push(Draft {
            path: path.clone(),
            multi_valued,
            category,
            nested,
        });

        if nested && path.len() < depth + 1 {
            let nested_shape = node_shape.or_else(|| class.and_then(|c| shape_for_class(g, c)));
            if let Some(ns) = nested_shape {
                collect_shape(g, &ns, Some(&path), multi_valued, depth, table, drafts, warnings);
            }
        }
    }
}

fn shape_for_class(g: &Graph, class: &str) -> Option<Term> {
    let mut shapes: Vec<&Term> = g
        .iter()
        .filter(|t| t.predicate == vocab::SH_TARGET_CLASS && t.object.as_iri() == Some(class))
        .map(|t| &t.subject)
        .collect();
    shapes.sort();
    shapes.first().map(|t| (*t).clone())
}

#[derive(Default)]
struct PredicateStats {
    datatypes: BTreeMap<String, usize>,
    literals: usize,
    resources: usize,
    children: BTreeSet<Term>,
}

/// Infers a spec from the instances of `type_iri` in `g`.
///
/// A predicate is nested when at least half of its observed objects are
/// resources; it is multi-valued when some instance reaches two or more values
/// through it; its category follows the most frequent literal datatype, with
/// ties resolved to `dd:String`. `rdf:type` is not treated as a property.
pub fn infer_emergent_schema(
    g: &Graph,
    type_iri: &str,
    depth: usize,
    table: &DatatypeTable,
) -> Result<MinimalDomainSpec, SpecError> {
    if depth == 0 {
        return Err(SpecError::InvalidDepth);
    }
    let roots: Vec<Term> = g.instances_of_type(type_iri).into_iter().map(Term::Iri).collect();
    if roots.is_empty() {
        return Err(SpecError::NoInstances(type_iri.to_string()));
    }
    let mut drafts = Vec::new();
    let mut warnings = BTreeSet::new();
    infer_level(g, &roots, None, depth, table, &mut drafts, &mut warnings);
    for d in &mut drafts {
        d.multi_valued = roots.iter().any(|r| g.resolve_path(r, &d.path).len() >= 2);
    }
    Ok(MinimalDomainSpec::finish(type_iri.to_string(), depth, drafts, warnings))
}

fn infer_level(
    g: &Graph,
    nodes: &[Term],
    prefix: Option<&PropertyPath>,
    depth: usize,
    table: &DatatypeTable,
    drafts: &mut Vec<Draft>,
    warnings: &mut BTreeSet<String>,
) {
    let mut stats: BTreeMap<&str, PredicateStats> = BTreeMap::new();
    for node in nodes {
        for t in g.triples_of(node) {
            if t.predicate == vocab::RDF_TYPE {
                continue;
            }
            let s = stats.entry(t.predicate.as_str()).or_default();
            match &t.object {
                Term::Literal(lit) => {
                    s.literals += 1;
                    *s.datatypes.entry(lit.datatype.clone()).or_default() += 1;
                }
                other => {
                    s.resources += 1;
                    if g.has_outgoing(other) {
                        s.children.insert(other.clone());
                    }
                }
            }
        }
    }
    for (predicate, s) in stats {
        let path = match prefix {
            Some(p) => p.child(predicate),
            None => PropertyPath::single(predicate),
        };
        let nested = s.resources * 2 >= s.resources + s.literals;
        let category = if nested {
            DatatypeCategory::String
        } else {
            majority_category(&s.datatypes, table, warnings)
        };
        drafts.push(Draft {
            path: path.clone(),
            multi_valued: false,
            category,
            nested,
        });
        if nested && path.len() < depth + 1 && !s.children.is_empty() {
            let children: Vec<Term> = s.children.into_iter().collect();
            infer_level(g, &children, Some(&path), depth, table, drafts, warnings);
        }
    }
}

fn majority_category(
    datatypes: &BTreeMap<String, usize>,
    table: &DatatypeTable,
    warnings: &mut BTreeSet<String>,
) -> DatatypeCategory {
    let Some(&top) = datatypes.values().max() else {
        return DatatypeCategory::String;
    };
    let cats: BTreeSet<DatatypeCategory> = datatypes
        .iter()
        .filter(|(_, &n)| n == top)
        .map(|(dt, _)| {
            if table.lookup(dt).is_none() {
                warnings.insert(format!("unknown datatype <{dt}> mapped to dd:String"));
            }
            table.categorize(dt)
        })
        .collect();
    if cats.len() == 1 {
        *cats.iter().next().unwrap()
    } else {
        DatatypeCategory::String
    }
}
