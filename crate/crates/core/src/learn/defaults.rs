//! Default configurations generated from domain specs.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::compare::{Aggregation, Comparator, ComparisonConfig, DDConfig, DecisionConfig, Hundredths, PathComparison};
use crate::index::{PreFilterConfig, DEFAULT_THRESHOLD_PCT};
use crate::schema::{MinimalDomainSpec, PropertySpec, SpecError};
use crate::standardize::StandardizationPlan;

/// Decision threshold of default configurations.
pub const DEFAULT_DECISION_THRESHOLD: Hundredths = match Hundredths::new(75) {
    Some(h) => h,
    None => unreachable!(),
};

/// Decision threshold of the bootstrap run, used while no labels exist yet.
pub const BOOTSTRAP_DECISION_THRESHOLD: Hundredths = match Hundredths::new(30) {
    Some(h) => h,
    None => unreachable!(),
};

/// Properties left out of default configurations. An entry matches a field by
/// name (including everything below it) or the IRI of its first predicate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IgnoreList(pub Vec<String>);

impl Default for IgnoreList {
    fn default() -> Self {
        Self(vec!["compliesWith".to_string()])
    }
}

impl IgnoreList {
    pub fn none() -> Self {
        Self(Vec::new())
    }

    pub fn matches(&self, prop: &PropertySpec) -> bool {
        self.0.iter().any(|e| {
            prop.field == *e || prop.field.starts_with(&format!("{e}.")) || prop.path.segments().first() == Some(e)
        })
    }
}

/// Builds the default configuration for an index pair sharing one schema:
/// every non-ignored path in the pre-filter at 40 %, per-category
/// standardizers, per-category comparators with `max` aggregation and weight 1
/// on top-level paths, and threshold 0.75 (0.30 when `bootstrap`).
pub fn default_config(
    source: &MinimalDomainSpec,
    target: &MinimalDomainSpec,
    ignore: &IgnoreList,
    bootstrap: bool,
) -> Result<DDConfig, SpecError> {
    let fields = |s: &MinimalDomainSpec| s.fields().map(str::to_string).collect::<BTreeSet<_>>();
    if fields(source) != fields(target) {
        return Err(SpecError::PathMismatch);
    }
    let included: Vec<&PropertySpec> = source.properties.iter().filter(|p| !ignore.matches(p)).collect();
    let pre_filter = PreFilterConfig::new(
        included.iter().map(|p| p.field.clone()).collect(),
        DEFAULT_THRESHOLD_PCT,
    );
    let plan = StandardizationPlan::default_for(source, |f| included.iter().any(|p| p.field == f));
    let comparison = ComparisonConfig {
        paths: included
            .iter()
            .filter(|p| p.path.len() == 1)
            .map(|p| {
                let comparator = if p.is_nested_instance {
                    Comparator::Levenshtein
                } else {
                    Comparator::default_for(p.category)
                };
                (
                    p.field.clone(),
                    PathComparison {
                        comparator,
                        aggregation: Aggregation::Max,
                        weight: Hundredths::ONE,
                    },
                )
            })
            .collect(),
    };
    let threshold = if bootstrap {
        BOOTSTRAP_DECISION_THRESHOLD
    } else {
        DEFAULT_DECISION_THRESHOLD
    };
    Ok(DDConfig {
        pre_filter,
        plan,
        comparison,
        decision: DecisionConfig { threshold },
    })
}
