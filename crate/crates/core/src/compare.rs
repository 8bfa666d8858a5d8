//! Similarity of property values and instances, the threshold decision model,
//! and the duplicate-detection run that ties pre-filtering, standardization,
//! comparison and decision together.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::index::{tokenize, ConfigError, FlatDocument, FlatValue, PreFilterConfig, TypeIndex};
use crate::schema::{DatatypeCategory, MinimalDomainSpec};
use crate::standardize::{apply_plan, PlanError, StandardizationPlan};

/// Longest value list compared per side; longer lists are truncated.
pub const MAX_CROSS_PRODUCT_SIDE: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DdError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

/// A value in `[0, 1]` with exactly two decimals, stored as hundredths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Hundredths(u8);

impl Hundredths {
    pub const ZERO: Hundredths = Hundredths(0);
    pub const ONE: Hundredths = Hundredths(100);

    pub const fn new(hundredths: u8) -> Option<Self> {
        if hundredths <= 100 {
            Some(Self(hundredths))
        } else {
            None
        }
    }

    /// Clamps to `[0, 100]` hundredths.
    pub fn clamped(hundredths: i64) -> Self {
        Self(hundredths.clamp(0, 100) as u8)
    }

    /// Accepts only values in `[0, 1]` with at most two decimals.
    pub fn from_f64(x: f64) -> Result<Self, ConfigError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(ConfigError::Invalid(format!("{x} is outside [0, 1]")));
        }
        let scaled = x * 100.0;
        let rounded = scaled.round();
        if (scaled - rounded).abs() > 1e-6 {
            return Err(ConfigError::Invalid(format!("{x} has more than two decimals")));
        }
        Ok(Self(rounded as u8))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 100.0
    }
}

impl fmt::Display for Hundredths {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}", self.value())
    }
}

impl Serialize for Hundredths {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for Hundredths {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let x = f64::deserialize(d)?;
        Hundredths::from_f64(x).map_err(serde::de::Error::custom)
    }
}

/// The comparator catalog. Every comparator is symmetric and returns a value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Comparator {
    Levenshtein,
    Exact,
    JaccardTokens,
    NumberRatio,
    NumberAbs { tolerance: f64 },
    BooleanEq,
    UriEq,
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Comparator::Levenshtein => f.write_str("levenshtein"),
            Comparator::Exact => f.write_str("exact"),
            Comparator::JaccardTokens => f.write_str("jaccard_tokens"),
            Comparator::NumberRatio => f.write_str("number_ratio"),
            Comparator::NumberAbs { tolerance } => write!(f, "number_abs({tolerance})"),
            Comparator::BooleanEq => f.write_str("boolean_eq"),
            Comparator::UriEq => f.write_str("uri_eq"),
        }
    }
}

impl Comparator {
    /// The default comparator for a literal category.
    pub fn default_for(category: DatatypeCategory) -> Self {
        match category {
            DatatypeCategory::String => Comparator::Levenshtein,
            DatatypeCategory::Number => Comparator::NumberRatio,
            DatatypeCategory::Boolean => Comparator::BooleanEq,
        }
    }

    /// Comparators that make sense for a path; `nested` paths also get `uri_eq`.
    pub fn catalog(category: DatatypeCategory, nested: bool) -> Vec<Comparator> {
        if nested {
            return vec![
                Comparator::Levenshtein,
                Comparator::JaccardTokens,
                Comparator::Exact,
                Comparator::UriEq,
            ];
        }
        match category {
            DatatypeCategory::String => vec![Comparator::Levenshtein, Comparator::JaccardTokens, Comparator::Exact],
            DatatypeCategory::Number => vec![
                Comparator::NumberRatio,
                Comparator::NumberAbs { tolerance: 1.0 },
                Comparator::Levenshtein,
                Comparator::Exact,
            ],
            DatatypeCategory::Boolean => vec![Comparator::BooleanEq, Comparator::Exact],
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        match self {
            Comparator::NumberAbs { tolerance } if !(tolerance.is_finite() && *tolerance >= 0.0) => Err(
                ConfigError::Invalid(format!("number_abs tolerance {tolerance} must be finite and >= 0")),
            ),
            _ => Ok(()),
        }
    }
}

/// Normalized Levenshtein similarity over Unicode scalar values.
pub fn levenshtein_similarity(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - strsim::levenshtein(a, b) as f64 / longest as f64
}

fn jaccard(a: &str, b: &str) -> f64 {
    let ta: BTreeSet<String> = tokenize(a).into_iter().collect();
    let tb: BTreeSet<String> = tokenize(b).into_iter().collect();
    if ta.is_empty() && tb.is_empty() {
        return 1.0;
    }
    let inter = ta.intersection(&tb).count();
    let union = ta.union(&tb).count();
    inter as f64 / union as f64
}

fn number_ratio(a: f64, b: f64) -> f64 {
    if a == b {
        1.0
    } else if a == 0.0 || b == 0.0 || a.signum() != b.signum() {
        0.0
    } else {
        a.abs().min(b.abs()) / a.abs().max(b.abs())
    }
}

/// Similarity of two single values. String comparators work on canonical
/// strings of any value kind; typed comparators return 0 for mismatched kinds.
pub fn compare_literal(a: &FlatValue, b: &FlatValue, c: &Comparator) -> f64 {
    match c {
        Comparator::Levenshtein => levenshtein_similarity(&a.canonical(), &b.canonical()),
        Comparator::Exact => f64::from(u8::from(a.canonical() == b.canonical())),
        Comparator::JaccardTokens => jaccard(&a.canonical(), &b.canonical()),
        Comparator::NumberRatio => match (a, b) {
            (FlatValue::Number(x), FlatValue::Number(y)) => number_ratio(*x, *y),
            _ => 0.0,
        },
        Comparator::NumberAbs { tolerance } => match (a, b) {
            (FlatValue::Number(x), FlatValue::Number(y)) => f64::from(u8::from((x - y).abs() <= *tolerance)),
            _ => 0.0,
        },
        Comparator::BooleanEq => match (a, b) {
            (FlatValue::Bool(x), FlatValue::Bool(y)) => f64::from(u8::from(x == y)),
            _ => 0.0,
        },
        Comparator::UriEq => match (a, b) {
            (FlatValue::Ref(x), FlatValue::Ref(y)) => f64::from(u8::from(x == y)),
            _ => 0.0,
        },
    }
}

/// How multiple values of a path are reduced to one similarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Max,
    Avg,
    Min,
}

impl Aggregation {
    pub const ALL: [Aggregation; 3] = [Aggregation::Max, Aggregation::Avg, Aggregation::Min];

    /// Reduces a non-empty slice.
    pub fn reduce(self, sims: &[f64]) -> f64 {
        debug_assert!(!sims.is_empty());
        match self {
            Aggregation::Max => sims.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Aggregation::Min => sims.iter().copied().fold(f64::INFINITY, f64::min),
            Aggregation::Avg => sims.iter().sum::<f64>() / sims.len() as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathComparison {
    pub comparator: Comparator,
    #[serde(default)]
    pub aggregation: Aggregation,
    pub weight: Hundredths,
}

/// Per-path comparator, aggregation and weight.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComparisonConfig {
    pub paths: BTreeMap<String, PathComparison>,
}

impl ComparisonConfig {
    pub fn weighted_paths(&self) -> impl Iterator<Item = (&String, &PathComparison)> {
        self.paths.iter().filter(|(_, pc)| pc.weight > Hundredths::ZERO)
    }

    pub fn validate(&self, spec: &MinimalDomainSpec) -> Result<(), ConfigError> {
        for (path, pc) in &self.paths {
            if !spec.has_field(path) {
                return Err(ConfigError::UnknownPath(path.clone()));
            }
            pc.comparator.validate()?;
        }
        if self.weighted_paths().next().is_none() {
            return Err(ConfigError::Invalid("at least one path needs a weight above 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DecisionConfig {
    pub threshold: Hundredths,
}

/// The full parameter set of a duplicate-detection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DDConfig {
    pub pre_filter: PreFilterConfig,
    pub plan: StandardizationPlan,
    pub comparison: ComparisonConfig,
    pub decision: DecisionConfig,
}

impl DDConfig {
    pub fn validate(&self, source: &MinimalDomainSpec, target: &MinimalDomainSpec) -> Result<(), DdError> {
        for spec in [source, target] {
            self.pre_filter.validate(spec)?;
            self.plan.validate(spec)?;
            self.comparison.validate(spec)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configs always serialize")
    }

    /// Hex SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

/// Which case of the path comparison produced a score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMode {
    /// Both sides literal: cross-product of values, aggregated.
    Literal,
    /// One (or, below the first nesting level, both) structured sides serialized to a string.
    Serialized,
    /// Both sides structured: sub-paths compared individually and averaged.
    Nested,
    /// Missing on at least one side; excluded from the weighted average.
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathScore {
    pub similarity: Option<f64>,
    pub mode: PathMode,
}

impl PathScore {
    const ABSENT: PathScore = PathScore {
        similarity: None,
        mode: PathMode::Absent,
    };
}

/// A compared instance pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub source_id: String,
    pub target_id: String,
    pub similarity: f64,
    pub accepted: bool,
    pub per_path: BTreeMap<String, PathScore>,
}

impl ScoredPair {
    /// The unordered pair key `(min, max)`.
    pub fn key(&self) -> (String, String) {
        pair_key(&self.source_id, &self.target_id)
    }
}

pub fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// Joins the canonical strings of every literal value strictly under `prefix`,
/// in key order, with single spaces. References are skipped.
pub fn serialize_fields(doc: &FlatDocument, prefix: &str) -> String {
    let parts: Vec<String> = doc
        .sub_fields(prefix)
        .flat_map(|(_, values)| values.iter())
        .filter(|v| !v.is_ref())
        .map(FlatValue::canonical)
        .collect();
    parts.join(" ")
}

fn cross_product(a: &[FlatValue], b: &[FlatValue], c: &Comparator, agg: Aggregation) -> f64 {
    let a = &a[..a.len().min(MAX_CROSS_PRODUCT_SIDE)];
    let b = &b[..b.len().min(MAX_CROSS_PRODUCT_SIDE)];
    let mut sims = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            sims.push(compare_literal(x, y, c));
        }
    }
    agg.reduce(&sims)
}

fn flattened_side(doc: &FlatDocument, path: &str) -> Vec<FlatValue> {
    let mut out = vec![FlatValue::Text(serialize_fields(doc, path))];
    out.extend(doc.get(path).unwrap_or(&[]).iter().filter(|v| !v.is_ref()).cloned());
    out
}

fn default_sub_comparison(a: &[FlatValue], b: &[FlatValue]) -> (Comparator, Aggregation) {
    let all = |f: fn(&FlatValue) -> bool| !a.is_empty() && !b.is_empty() && a.iter().chain(b).all(f);
    let comparator = if all(|v| matches!(v, FlatValue::Number(_))) {
        Comparator::NumberRatio
    } else if all(|v| matches!(v, FlatValue::Bool(_))) {
        Comparator::BooleanEq
    } else {
        Comparator::Levenshtein
    };
    (comparator, Aggregation::Max)
}

fn compare_field(
    a: &FlatDocument,
    b: &FlatDocument,
    path: &str,
    comparator: &Comparator,
    agg: Aggregation,
    cfg: &ComparisonConfig,
    top_level: bool,
) -> PathScore {
    let av = a.get(path).unwrap_or(&[]);
    let bv = b.get(path).unwrap_or(&[]);
    let a_struct = a.has_sub_fields(path);
    let b_struct = b.has_sub_fields(path);
    if (av.is_empty() && !a_struct) || (bv.is_empty() && !b_struct) {
        return PathScore::ABSENT;
    }
    let serialized = |a_side: Vec<FlatValue>, b_side: Vec<FlatValue>| PathScore {
        similarity: Some(cross_product(&a_side, &b_side, comparator, agg)),
        mode: PathMode::Serialized,
    };
    match (a_struct, b_struct) {
        (false, false) => PathScore {
            similarity: Some(cross_product(av, bv, comparator, agg)),
            mode: PathMode::Literal,
        },
        (true, false) => serialized(flattened_side(a, path), bv.to_vec()),
        (false, true) => serialized(av.to_vec(), flattened_side(b, path)),
        (true, true) if !top_level => serialized(flattened_side(a, path), flattened_side(b, path)),
        (true, true) => {
            let depth = path.matches('.').count() + 1;
            let children: BTreeSet<&str> = a
                .sub_fields(path)
                .chain(b.sub_fields(path))
                .map(|(k, _)| k.as_str())
                .filter(|k| k.matches('.').count() == depth)
                .collect();
            let mut sims = Vec::new();
            for child in children {
                let (c, ag) = match cfg.paths.get(child) {
                    Some(pc) => (pc.comparator, pc.aggregation),
                    None => default_sub_comparison(a.get(child).unwrap_or(&[]), b.get(child).unwrap_or(&[])),
                };
                if let Some(s) = compare_field(a, b, child, &c, ag, cfg, false).similarity {
                    sims.push(s);
                }
            }
            if sims.is_empty() {
                serialized(flattened_side(a, path), flattened_side(b, path))
            } else {
                PathScore {
                    similarity: Some(sims.iter().sum::<f64>() / sims.len() as f64),
                    mode: PathMode::Nested,
                }
            }
        }
    }
}

/// Compares one configured path of two (standardized) documents.
///
/// Literal lists are compared element-wise and aggregated; a structured value
/// (one with sub-fields) against a literal is serialized first; two structured
/// values are compared sub-path by sub-path one level deep. A path missing on
/// either side is absent rather than 0.
pub fn compare_path(a: &FlatDocument, b: &FlatDocument, path: &str, cfg: &ComparisonConfig) -> PathScore {
    match cfg.paths.get(path) {
        Some(pc) => compare_field(a, b, path, &pc.comparator, pc.aggregation, cfg, true),
        None => PathScore::ABSENT,
    }
}

/// Weighted mean over present scores with positive weights; 0 when nothing is present.
pub fn weighted_mean(scores: impl IntoIterator<Item = (f64, Option<f64>)>) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (w, s) in scores {
        if let (true, Some(s)) = (w > 0.0, s) {
            num += w * s;
            den += w;
        }
    }
    if den > 0.0 {
        (num / den).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Weighted-average similarity of two documents over the weighted paths of `cfg`.
pub fn compare_instances(a: &FlatDocument, b: &FlatDocument, cfg: &ComparisonConfig) -> ScoredPair {
    let per_path: BTreeMap<String, PathScore> = cfg
        .weighted_paths()
        .map(|(path, _)| (path.clone(), compare_path(a, b, path, cfg)))
        .collect();
    let similarity = weighted_mean(
        cfg.weighted_paths()
            .map(|(path, pc)| (pc.weight.value(), per_path[path].similarity)),
    );
    ScoredPair {
        source_id: a.id.clone(),
        target_id: b.id.clone(),
        similarity,
        accepted: false,
        per_path,
    }
}

/// Accepts a pair whose similarity lies strictly above the threshold.
pub fn decide(pair: &ScoredPair, d: &DecisionConfig) -> bool {
    pair.similarity > d.threshold.value()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Candidates retrieved per source document; `None` means unlimited.
    pub candidate_limit: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            candidate_limit: Some(crate::index::DEFAULT_CANDIDATE_LIMIT),
        }
    }
}

/// Candidate pairs from pre-filtering every source document against `target`.
///
/// When both indices are the same object, a document never matches itself and
/// pairs are unordered: each appears once as `(min id, max id)`.
pub fn candidate_pairs(
    source: &TypeIndex,
    target: &TypeIndex,
    pre_filter: &PreFilterConfig,
    opts: &RunOptions,
) -> Result<Vec<(String, String)>, DdError> {
    pre_filter.validate(source.spec())?;
    let self_join = std::ptr::eq(source, target);
    let per_doc: Vec<Vec<(String, String)>> = source
        .documents()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|doc| {
            let exclude = self_join.then_some(doc.id.as_str());
            let hits = target.more_like_this(doc, pre_filter, opts.candidate_limit, exclude)?;
            Ok(hits
                .into_iter()
                .map(|c| {
                    if self_join {
                        pair_key(&doc.id, &c.id)
                    } else {
                        (doc.id.clone(), c.id)
                    }
                })
                .collect())
        })
        .collect::<Result<_, ConfigError>>()?;
    let pairs: BTreeSet<(String, String)> = per_doc.into_iter().flatten().collect();
    Ok(pairs.into_iter().collect())
}

/// Applies `plan` to every document of `index`.
pub fn standardize_index(index: &TypeIndex, plan: &StandardizationPlan) -> HashMap<String, FlatDocument> {
    index
        .documents()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|d| (d.id.clone(), apply_plan(d, plan)))
        .collect()
}

/// Sorts by similarity descending, then ids ascending.
pub fn sort_results(results: &mut [ScoredPair]) {
    results.sort_by(|a, b| {
        b.similarity
            .total_cmp(&a.similarity)
            .then_with(|| a.source_id.cmp(&b.source_id))
            .then_with(|| a.target_id.cmp(&b.target_id))
    });
}

/// Runs duplicate detection: pre-filter candidates from `target` for every
/// `source` document, standardize both sides, compare and decide. All scored
/// candidate pairs are returned with their accept flag, sorted by similarity.
pub fn run_duplicate_detection(
    source: &TypeIndex,
    target: &TypeIndex,
    cfg: &DDConfig,
    opts: &RunOptions,
) -> Result<Vec<ScoredPair>, DdError> {
    cfg.validate(source.spec(), target.spec())?;
    let pairs = candidate_pairs(source, target, &cfg.pre_filter, opts)?;
    let std_source = standardize_index(source, &cfg.plan);
    let std_target = if std::ptr::eq(source, target) {
        None
    } else {
        Some(standardize_index(target, &cfg.plan))
    };
    let std_target = std_target.as_ref().unwrap_or(&std_source);
    let mut results: Vec<ScoredPair> = pairs
        .par_iter()
        .map(|(s, t)| {
            let mut pair = compare_instances(&std_source[s], &std_target[t], &cfg.comparison);
            pair.accepted = decide(&pair, &cfg.decision);
            pair
        })
        .collect();
    sort_results(&mut results);
    Ok(results)
}
