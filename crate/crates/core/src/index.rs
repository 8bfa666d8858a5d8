//! Flat per-type documents and candidate retrieval.
//!
//! Every instance of a type is flattened into a [`FlatDocument`] keyed by
//! dotted property paths. A [`TypeIndex`] keeps an inverted index over the
//! value terms of each field and an ordered index over numeric values, and
//! answers more-like-this queries used for pre-filtering.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use ordered_float::OrderedFloat;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::kg::{Graph, Term};
use crate::schema::{DatatypeCategory, MinimalDomainSpec};

/// Default number of candidates retrieved per sample.
pub const DEFAULT_CANDIDATE_LIMIT: usize = 50;

/// Default share of sample terms a candidate must contain.
pub const DEFAULT_THRESHOLD_PCT: u8 = 40;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("pre-filter needs at least one property")]
    EmptyProperties,
    #[error("unknown property path {0:?}")]
    UnknownPath(String),
    #[error("threshold {0} is outside 0..=100")]
    ThresholdOutOfRange(u32),
    #[error("{0}")]
    Invalid(String),
}

/// A single flattened property value.
#[derive(Debug, Clone, PartialEq)]
pub enum FlatValue {
    Text(String),
    Number(f64),
    Bool(bool),
    /// IRI (or `_:id`) of a nested instance whose fields live under dotted sub-paths.
    Ref(String),
}

impl FlatValue {
    /// The canonical string form used for serialization and string comparison.
    pub fn canonical(&self) -> String {
        match self {
            FlatValue::Text(s) | FlatValue::Ref(s) => s.clone(),
            FlatValue::Number(n) => canonical_number(*n),
            FlatValue::Bool(b) => b.to_string(),
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            FlatValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            FlatValue::Number(n) => Some(*n),
            _ => None,
        }
    }

    pub fn is_ref(&self) -> bool {
        matches!(self, FlatValue::Ref(_))
    }

    /// Terms this value contributes to the inverted index.
    pub fn terms(&self) -> Vec<String> {
        match self {
            FlatValue::Text(s) => tokenize(s),
            FlatValue::Number(_) | FlatValue::Bool(_) => vec![self.canonical()],
            FlatValue::Ref(_) => Vec::new(),
        }
    }

    fn from_literal(lexical: &str, category: DatatypeCategory) -> Self {
        match category {
            DatatypeCategory::String => FlatValue::Text(lexical.to_string()),
            DatatypeCategory::Number => match lexical.trim().parse::<f64>() {
                Ok(n) if n.is_finite() => FlatValue::Number(n),
                _ => FlatValue::Text(lexical.to_string()),
            },
            DatatypeCategory::Boolean => match lexical.trim() {
                "true" | "1" => FlatValue::Bool(true),
                "false" | "0" => FlatValue::Bool(false),
                _ => FlatValue::Text(lexical.to_string()),
            },
        }
    }
}

impl fmt::Display for FlatValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// Integers print without a fractional part; everything else uses the shortest
/// round-tripping decimal.
pub fn canonical_number(n: f64) -> String {
    if n == 0.0 {
        "0".to_string()
    } else if n.fract() == 0.0 && n.abs() < 1e15 {
        format!("{n:.0}")
    } else {
        format!("{n}")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FlatValueRepr {
    Bool(bool),
    Number(f64),
    Text(String),
    Ref {
        #[serde(rename = "@id")]
        id: String,
    },
}

impl Serialize for FlatValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            FlatValue::Text(t) => s.serialize_str(t),
            FlatValue::Number(n) => {
                if n.fract() == 0.0 && n.abs() < 9e15 {
                    s.serialize_i64(*n as i64)
                } else {
                    s.serialize_f64(*n)
                }
            }
            FlatValue::Bool(b) => s.serialize_bool(*b),
            FlatValue::Ref(id) => FlatValueRepr::Ref { id: id.clone() }.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for FlatValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match FlatValueRepr::deserialize(d)? {
            FlatValueRepr::Bool(b) => FlatValue::Bool(b),
            FlatValueRepr::Number(n) => FlatValue::Number(n),
            FlatValueRepr::Text(t) => FlatValue::Text(t),
            FlatValueRepr::Ref { id } => FlatValue::Ref(id),
        })
    }
}

/// An instance flattened into dotted path fields. Absent properties are absent keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatDocument {
    pub id: String,
    pub fields: BTreeMap<String, Vec<FlatValue>>,
}

impl FlatDocument {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            fields: BTreeMap::new(),
        }
    }

    pub fn with(mut self, field: &str, values: Vec<FlatValue>) -> Self {
        self.fields.insert(field.to_string(), values);
        self
    }

    pub fn get(&self, field: &str) -> Option<&[FlatValue]> {
        self.fields.get(field).map(Vec::as_slice)
    }

    /// Whether any field lives strictly under `prefix` (i.e. starts with `prefix.`).
    pub fn has_sub_fields(&self, prefix: &str) -> bool {
        self.sub_fields(prefix).next().is_some()
    }

    /// Fields strictly under `prefix`, in key order.
    pub fn sub_fields<'a>(&'a self, prefix: &str) -> impl Iterator<Item = (&'a String, &'a Vec<FlatValue>)> {
        let start = format!("{prefix}.");
        self.fields
            .range(start.clone()..)
            .take_while(move |(k, _)| k.starts_with(&start))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("flat documents always serialize")
    }
}

/// Flattens `instance` according to `spec`. Literals are converted by the
/// path's category (unparseable numbers and booleans stay text); resources
/// become [`FlatValue::Ref`]. Single-valued paths keep only their first value.
pub fn flatten(g: &Graph, instance: &str, spec: &MinimalDomainSpec) -> FlatDocument {
    let subject = Term::iri(instance);
    let mut doc = FlatDocument::new(instance);
    for prop in &spec.properties {
        let mut values: Vec<FlatValue> = g
            .resolve_path(&subject, &prop.path)
            .into_iter()
            .map(|t| match t {
                Term::Literal(lit) => FlatValue::from_literal(&lit.lexical, prop.category),
                other => FlatValue::Ref(other.resource_id().expect("resource term")),
            })
            .collect();
        if values.is_empty() {
            continue;
        }
        if !prop.multi_valued {
            values.truncate(1);
        }
        doc.fields.insert(prop.field.clone(), values);
    }
    doc
}

/// Lowercases, splits on runs of non-alphanumeric characters and de-duplicates
/// keeping first occurrences.
pub fn tokenize(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for tok in lower.split(|c: char| !c.is_alphanumeric()) {
        if !tok.is_empty() && seen.insert(tok) {
            out.push(tok.to_string());
        }
    }
    out
}

/// Pre-filter parameters: which fields feed the more-like-this query and what
/// percentage of sample terms a candidate must contain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PreFilterConfig {
    pub properties: Vec<String>,
    pub threshold_pct: u8,
}

impl PreFilterConfig {
    pub fn new(properties: Vec<String>, threshold_pct: u8) -> Self {
        Self {
            properties,
            threshold_pct,
        }
    }

    pub fn validate(&self, spec: &MinimalDomainSpec) -> Result<(), ConfigError> {
        if self.properties.is_empty() {
            return Err(ConfigError::EmptyProperties);
        }
        if self.threshold_pct > 100 {
            return Err(ConfigError::ThresholdOutOfRange(self.threshold_pct.into()));
        }
        for p in &self.properties {
            if !spec.has_field(p) {
                return Err(ConfigError::UnknownPath(p.clone()));
            }
        }
        Ok(())
    }

    /// Number of sample terms a candidate must match: `ceil(pct/100 * n)`.
    pub fn required(&self, n_terms: usize) -> usize {
        (usize::from(self.threshold_pct) * n_terms).div_ceil(100)
    }
}

/// A more-like-this hit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub id: String,
    pub match_count: usize,
}

/// All instances of one type, flattened and indexed.
#[derive(Debug, Clone)]
pub struct TypeIndex {
    spec: MinimalDomainSpec,
    docs: BTreeMap<String, FlatDocument>,
    inverted: HashMap<(String, String), Vec<String>>,
    numeric: BTreeMap<String, BTreeMap<OrderedFloat<f64>, Vec<String>>>,
}

impl TypeIndex {
    /// Flattens and indexes every instance of `spec.type_iri` in `g`.
    pub fn build(g: &Graph, spec: MinimalDomainSpec) -> Self {
        let docs = g
            .instances_of_type(&spec.type_iri)
            .into_iter()
            .map(|id| flatten(g, &id, &spec))
            .collect();
        Self::from_documents(spec, docs)
    }

    pub fn from_documents(spec: MinimalDomainSpec, docs: Vec<FlatDocument>) -> Self {
        let mut index = Self {
            spec,
            docs: BTreeMap::new(),
            inverted: HashMap::new(),
            numeric: BTreeMap::new(),
        };
        for doc in docs {
            index.docs.insert(doc.id.clone(), doc);
        }
        for (id, doc) in &index.docs {
            for (field, values) in &doc.fields {
                for v in values {
                    for term in v.terms() {
                        let posting = index.inverted.entry((field.clone(), term)).or_default();
                        if posting.last() != Some(id) {
                            posting.push(id.clone());
                        }
                    }
                    if let FlatValue::Number(n) = v {
                        let ids = index
                            .numeric
                            .entry(field.clone())
                            .or_default()
                            .entry(OrderedFloat(*n))
                            .or_default();
                        if ids.last() != Some(id) {
                            ids.push(id.clone());
                        }
                    }
                }
            }
        }
        index
    }

    pub fn spec(&self) -> &MinimalDomainSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&FlatDocument> {
        self.docs.get(id)
    }

    /// Documents in id order.
    pub fn documents(&self) -> impl Iterator<Item = &FlatDocument> {
        self.docs.values()
    }

    /// Posting list of `term` on `field`, sorted by id.
    pub fn postings(&self, field: &str, term: &str) -> &[String] {
        self.inverted
            .get(&(field.to_string(), term.to_string()))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn posting_count(&self) -> usize {
        self.inverted.len()
    }

    /// Iterates all `(field, term) -> ids` postings.
    pub fn all_postings(&self) -> impl Iterator<Item = (&str, &str, &[String])> {
        self.inverted
            .iter()
            .map(|((f, t), ids)| (f.as_str(), t.as_str(), ids.as_slice()))
    }

    /// Ids whose numeric value on `field` lies in `[lo, hi]`, sorted and unique.
    pub fn numeric_range(&self, field: &str, lo: f64, hi: f64) -> Vec<String> {
        let Some(tree) = self.numeric.get(field) else {
            return Vec::new();
        };
        let ids: BTreeSet<&String> = tree
            .range(OrderedFloat(lo)..=OrderedFloat(hi))
            .flat_map(|(_, ids)| ids)
            .collect();
        ids.into_iter().cloned().collect()
    }

    /// The distinct terms of `doc` over `fields`, in first-seen order.
    pub fn sample_terms(doc: &FlatDocument, fields: &[String]) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for f in fields {
            for v in doc.get(f).unwrap_or(&[]) {
                for t in v.terms() {
                    if seen.insert(t.clone()) {
                        out.push(t);
                    }
                }
            }
        }
        out
    }

    /// Finds documents containing at least `ceil(pct/100 * n)` of the sample's
    /// `n` distinct terms on the configured fields. Results are ordered by
    /// match count descending, then id; `exclude` suppresses a self match.
    pub fn more_like_this(
        &self,
        sample: &FlatDocument,
        cfg: &PreFilterConfig,
        limit: Option<usize>,
        exclude: Option<&str>,
    ) -> Result<Vec<Candidate>, ConfigError> {
        cfg.validate(&self.spec)?;
        let terms = Self::sample_terms(sample, &cfg.properties);
        if terms.is_empty() {
            return Ok(Vec::new());
        }
        let required = cfg.required(terms.len());
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for term in &terms {
            let mut hit: BTreeSet<&str> = BTreeSet::new();
            for f in &cfg.properties {
                hit.extend(self.postings(f, term).iter().map(String::as_str));
            }
            for id in hit {
                *counts.entry(id).or_default() += 1;
            }
        }
        let mut out: Vec<Candidate> = if required == 0 {
            self.docs
                .keys()
                .map(|id| Candidate {
                    id: id.clone(),
                    match_count: counts.get(id.as_str()).copied().unwrap_or(0),
                })
                .collect()
        } else {
            counts
                .into_iter()
                .filter(|&(_, n)| n >= required)
                .map(|(id, n)| Candidate {
                    id: id.to_string(),
                    match_count: n,
                })
                .collect()
        };
        if let Some(ex) = exclude {
            out.retain(|c| c.id != ex);
        }
        out.sort_by(|a, b| b.match_count.cmp(&a.match_count).then_with(|| a.id.cmp(&b.id)));
        if let Some(limit) = limit {
            out.truncate(limit);
        }
        Ok(out)
    }
}
