//! Property-value standardization.
//!
//! A [`StandardizationPlan`] maps field paths to a sequence of standardizers.
//! Element-level functions run on each value first, list-level functions then
//! run on the resulting value list.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::index::{FlatDocument, FlatValue};
use crate::schema::{DatatypeCategory, MinimalDomainSpec};

/// Longest standardizer sequence allowed per path.
pub const MAX_SEQUENCE_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("unknown property path {0:?}")]
    UnknownPath(String),
    #[error("unknown standardizer {0:?}")]
    UnknownStandardizer(String),
    #[error("invalid parameters for {name}: {reason}")]
    InvalidParams { name: String, reason: String },
    #[error("{path}: element-level {element} follows a list-level standardizer")]
    LevelOrder { path: String, element: String },
    #[error("{path}: sequence longer than {MAX_SEQUENCE_LEN}")]
    TooLong { path: String },
    #[error("{path}: {name} does not apply to {category} values")]
    NotApplicable {
        path: String,
        name: String,
        category: DatatypeCategory,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Element,
    List,
}

/// The standardizer catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Standardizer {
    Lowercase,
    Trim,
    CollapseWhitespace,
    StripPunctuation,
    StripDiacritics,
    Round { decimals: u32 },
    Identity,
    Setify,
    Sort,
    TakeFirst { k: usize },
}

impl Standardizer {
    pub fn name(&self) -> &'static str {
        match self {
            Standardizer::Lowercase => "lowercase",
            Standardizer::Trim => "trim",
            Standardizer::CollapseWhitespace => "collapse_whitespace",
            Standardizer::StripPunctuation => "strip_punctuation",
            Standardizer::StripDiacritics => "strip_diacritics",
            Standardizer::Round { .. } => "round",
            Standardizer::Identity => "identity",
            Standardizer::Setify => "setify",
            Standardizer::Sort => "sort",
            Standardizer::TakeFirst { .. } => "take_first",
        }
    }

    pub fn level(&self) -> Level {
        match self {
            Standardizer::Setify | Standardizer::Sort | Standardizer::TakeFirst { .. } => Level::List,
            _ => Level::Element,
        }
    }

    pub fn applies_to(&self, category: DatatypeCategory) -> bool {
        match self {
            Standardizer::Lowercase
            | Standardizer::Trim
            | Standardizer::CollapseWhitespace
            | Standardizer::StripPunctuation
            | Standardizer::StripDiacritics => category == DatatypeCategory::String,
            Standardizer::Round { .. } => category == DatatypeCategory::Number,
            _ => true,
        }
    }

    /// Element-level catalog entries usable for a category.
    pub fn element_catalog(category: DatatypeCategory) -> Vec<Standardizer> {
        match category {
            DatatypeCategory::String => vec![
                Standardizer::Lowercase,
                Standardizer::Trim,
                Standardizer::CollapseWhitespace,
                Standardizer::StripPunctuation,
                Standardizer::StripDiacritics,
            ],
            DatatypeCategory::Number => (0..=3).map(|d| Standardizer::Round { decimals: d }).collect(),
            DatatypeCategory::Boolean => vec![Standardizer::Identity],
        }
    }

    /// Every sequence the configuration search may assign to a path: any
    /// subset of the element catalog in catalog order (at most one `round`),
    /// followed by `setify` for multi-valued paths. The empty sequence comes first.
    pub fn sequence_catalog(category: DatatypeCategory, multi_valued: bool) -> Vec<Vec<Standardizer>> {
        let elements = Standardizer::element_catalog(category);
        let mut bases: Vec<Vec<Standardizer>> = match category {
            DatatypeCategory::String => (0u32..1 << elements.len())
                .map(|mask| {
                    elements
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, s)| *s)
                        .collect()
                })
                .collect(),
            _ => std::iter::once(Vec::new())
                .chain(elements.iter().map(|s| vec![*s]))
                .collect(),
        };
        if multi_valued {
            let with_setify: Vec<Vec<Standardizer>> = bases
                .iter()
                .map(|b| {
                    let mut b = b.clone();
                    b.push(Standardizer::Setify);
                    b
                })
                .collect();
            bases.extend(with_setify);
        }
        bases
    }

    fn apply_text(&self, s: &str) -> Option<String> {
        Some(match self {
            Standardizer::Lowercase => s.to_lowercase(),
            Standardizer::Trim => s.trim().to_string(),
            Standardizer::CollapseWhitespace => s.split_whitespace().collect::<Vec<_>>().join(" "),
            Standardizer::StripPunctuation => s.chars().filter(|c| c.is_alphanumeric() || c.is_whitespace()).collect(),
            Standardizer::StripDiacritics => s.nfd().filter(|c| !is_combining_mark(*c)).nfc().collect(),
            _ => return None,
        })
    }

    fn params(&self) -> BTreeMap<String, serde_json::Value> {
        let mut p = BTreeMap::new();
        match self {
            Standardizer::Round { decimals } => {
                p.insert("decimals".into(), (*decimals).into());
            }
            Standardizer::TakeFirst { k } => {
                p.insert("k".into(), (*k).into());
            }
            _ => {}
        }
        p
    }

    fn from_parts(name: &str, params: &BTreeMap<String, serde_json::Value>) -> Result<Self, PlanError> {
        let invalid = |reason: &str| PlanError::InvalidParams {
            name: name.to_string(),
            reason: reason.to_string(),
        };
        let uint = |key: &str| -> Result<u64, PlanError> {
            params
                .get(key)
                .ok_or_else(|| invalid(&format!("missing {key}")))?
                .as_u64()
                .ok_or_else(|| invalid(&format!("{key} must be a non-negative integer")))
        };
        let no_params = |s: Standardizer| {
            if params.is_empty() {
                Ok(s)
            } else {
                Err(invalid("takes no parameters"))
            }
        };
        let unexpected = |allowed: &str| params.keys().any(|k| k != allowed);
        match name {
            "lowercase" => no_params(Standardizer::Lowercase),
            "trim" => no_params(Standardizer::Trim),
            "collapse_whitespace" => no_params(Standardizer::CollapseWhitespace),
            "strip_punctuation" => no_params(Standardizer::StripPunctuation),
            "strip_diacritics" => no_params(Standardizer::StripDiacritics),
            "identity" => no_params(Standardizer::Identity),
            "setify" => no_params(Standardizer::Setify),
            "sort" => no_params(Standardizer::Sort),
            "round" => {
                if unexpected("decimals") {
                    return Err(invalid("only accepts decimals"));
                }
                let d = uint("decimals")?;
                if d > 12 {
                    return Err(invalid("decimals must be at most 12"));
                }
                Ok(Standardizer::Round { decimals: d as u32 })
            }
            "take_first" => {
                if unexpected("k") {
                    return Err(invalid("only accepts k"));
                }
                Ok(Standardizer::TakeFirst { k: uint("k")? as usize })
            }
            other => Err(PlanError::UnknownStandardizer(other.to_string())),
        }
    }
}

impl fmt::Display for Standardizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Standardizer::Round { decimals } => write!(f, "round({decimals})"),
            Standardizer::TakeFirst { k } => write!(f, "take_first({k})"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct StandardizerRepr {
    #[serde(rename = "fn")]
    name: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    params: BTreeMap<String, serde_json::Value>,
}

impl Serialize for Standardizer {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        StandardizerRepr {
            name: self.name().to_string(),
            params: self.params(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Standardizer {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = StandardizerRepr::deserialize(d)?;
        Standardizer::from_parts(&repr.name, &repr.params).map_err(serde::de::Error::custom)
    }
}

fn round_to(n: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    let r = (n * scale).round() / scale;
    if r.is_finite() {
        r
    } else {
        n
    }
}

/// Applies element-level standardizers left to right. Inapplicable ones are
/// skipped (with a warning); references to nested instances pass through.
pub fn standardize_value(v: &FlatValue, seq: &[Standardizer]) -> FlatValue {
    let mut v = v.clone();
    for st in seq {
        if st.level() != Level::Element {
            continue;
        }
        v = match (&v, st) {
            (FlatValue::Ref(_), _) | (_, Standardizer::Identity) => v,
            (FlatValue::Text(s), st) if st.applies_to(DatatypeCategory::String) => {
                FlatValue::Text(st.apply_text(s).expect("text standardizer"))
            }
            (FlatValue::Number(n), Standardizer::Round { decimals }) => FlatValue::Number(round_to(*n, *decimals)),
            _ => {
                tracing::warn!(standardizer = %st, value = %v, "standardizer not applicable, skipped");
                v
            }
        };
    }
    v
}

fn value_key(v: &FlatValue) -> (u8, String) {
    match v {
        FlatValue::Number(n) => (0, format!("{:?}", if *n == 0.0 { 0.0 } else { *n })),
        FlatValue::Bool(b) => (1, b.to_string()),
        FlatValue::Text(s) => (2, s.clone()),
        FlatValue::Ref(s) => (3, s.clone()),
    }
}

fn value_order(a: &FlatValue, b: &FlatValue) -> std::cmp::Ordering {
    match (a, b) {
        (FlatValue::Number(x), FlatValue::Number(y)) => x.total_cmp(y),
        _ => value_key(a).cmp(&value_key(b)),
    }
}

/// Applies list-level standardizers left to right.
pub fn standardize_list(values: &[FlatValue], seq: &[Standardizer]) -> Vec<FlatValue> {
    let mut out = values.to_vec();
    for st in seq {
        match st {
            Standardizer::Setify => {
                let mut seen = HashSet::new();
                out.retain(|v| seen.insert(value_key(v)));
            }
            Standardizer::Sort => out.sort_by(value_order),
            Standardizer::TakeFirst { k } => out.truncate(*k),
            _ => {}
        }
    }
    out
}

/// Per-path standardizer sequences.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StandardizationPlan {
    pub paths: BTreeMap<String, Vec<Standardizer>>,
}

impl StandardizationPlan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, path: &str, seq: Vec<Standardizer>) -> Self {
        self.paths.insert(path.to_string(), seq);
        self
    }

    pub fn get(&self, path: &str) -> &[Standardizer] {
        self.paths.get(path).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Checks paths against `spec`, applicability against each path's
    /// category, level ordering and sequence length.
    pub fn validate(&self, spec: &MinimalDomainSpec) -> Result<(), PlanError> {
        for (path, seq) in &self.paths {
            let prop = spec
                .property(path)
                .ok_or_else(|| PlanError::UnknownPath(path.clone()))?;
            validate_sequence(path, seq, prop.category)?;
        }
        Ok(())
    }

    /// The default plan: strings are lowercased, trimmed and whitespace-collapsed
    /// (plus `setify` when multi-valued), numbers rounded to two decimals,
    /// booleans left alone.
    pub fn default_for(spec: &MinimalDomainSpec, include: impl Fn(&str) -> bool) -> Self {
        let mut plan = Self::new();
        for p in spec.properties.iter().filter(|p| include(&p.field)) {
            let seq = match p.category {
                DatatypeCategory::String => {
                    let mut seq = vec![
                        Standardizer::Lowercase,
                        Standardizer::Trim,
                        Standardizer::CollapseWhitespace,
                    ];
                    if p.multi_valued {
                        seq.push(Standardizer::Setify);
                    }
                    seq
                }
                DatatypeCategory::Number => vec![Standardizer::Round { decimals: 2 }],
                DatatypeCategory::Boolean => continue,
            };
            plan.paths.insert(p.field.clone(), seq);
        }
        plan
    }
}

pub fn validate_sequence(path: &str, seq: &[Standardizer], category: DatatypeCategory) -> Result<(), PlanError> {
    if seq.len() > MAX_SEQUENCE_LEN {
        return Err(PlanError::TooLong { path: path.into() });
    }
    let mut seen_list = false;
    for st in seq {
        if !st.applies_to(category) {
            return Err(PlanError::NotApplicable {
                path: path.into(),
                name: st.name().into(),
                category,
            });
        }
        match st.level() {
            Level::List => seen_list = true,
            Level::Element if seen_list => {
                return Err(PlanError::LevelOrder {
                    path: path.into(),
                    element: st.name().into(),
                })
            }
            Level::Element => {}
        }
    }
    Ok(())
}

/// Standardizes a document. Paths not in the plan are copied unchanged; the
/// key set never changes.
pub fn apply_plan(doc: &FlatDocument, plan: &StandardizationPlan) -> FlatDocument {
    let mut out = doc.clone();
    for (path, seq) in &plan.paths {
        if let Some(values) = out.fields.get_mut(path) {
            let elems: Vec<FlatValue> = values.iter().map(|v| standardize_value(v, seq)).collect();
            *values = standardize_list(&elems, seq);
        }
    }
    out
}
