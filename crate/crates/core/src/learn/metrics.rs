//! Result analysis against labelled pairs.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::labels::LabelSet;
use crate::compare::ScoredPair;

/// Confusion counts over labelled pairs and the derived quality measures.
///
/// Precision is 1 when nothing was accepted and recall is 1 when nothing is
/// labelled positive; such reports are marked `degenerate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_neg: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub labelled_total: usize,
    pub degenerate: bool,
}

impl MetricsReport {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize, labelled_total: usize) -> Self {
        let precision = if tp + fp == 0 {
            1.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let recall = if tp + fn_ == 0 {
            1.0
        } else {
            tp as f64 / (tp + fn_) as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            true_pos: tp,
            false_pos: fp,
            false_neg: fn_,
            true_neg: tn,
            precision,
            recall,
            f1,
            labelled_total,
            degenerate: tp + fp == 0 || tp + fn_ == 0,
        }
    }

    pub fn metric(&self, m: Metric) -> f64 {
        match m {
            Metric::Recall => self.recall,
            Metric::Precision => self.precision,
            Metric::F1 => self.f1,
        }
    }
}

fn accepted_keys<'a>(results: impl IntoIterator<Item = &'a ScoredPair>) -> BTreeSet<(String, String)> {
    results
        .into_iter()
        .filter(|p| p.accepted)
        .map(ScoredPair::key)
        .collect()
}

/// Scores accepted pairs against labels. Only labelled pairs count; a labelled
/// duplicate that was never produced as a candidate is a false negative.
pub fn analyze(results: &[ScoredPair], labels: &LabelSet) -> MetricsReport {
    analyze_accepted(&accepted_keys(results), labels)
}

/// [`analyze`] over a precomputed set of accepted unordered pair keys.
pub fn analyze_accepted(accepted: &BTreeSet<(String, String)>, labels: &LabelSet) -> MetricsReport {
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (key, is_dup) in labels.iter() {
        match (accepted.contains(key), is_dup) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    MetricsReport::from_counts(tp, fp, fn_, tn, labels.len())
}

/// Scores against a ground truth where every pair not labelled as duplicate
/// is a non-duplicate, so any accepted pair outside the positives is a false
/// positive. `true_neg` counts only explicitly labelled negatives.
pub fn analyze_closed_world(results: &[ScoredPair], truth: &LabelSet) -> MetricsReport {
    let accepted = accepted_keys(results);
    let mut tp = 0;
    let mut fp = 0;
    for (a, b) in &accepted {
        if truth.get(a, b) == Some(true) {
            tp += 1;
        } else {
            fp += 1;
        }
    }
    let positives = truth.positives();
    let tn = truth.iter().filter(|(k, v)| !v && !accepted.contains(*k)).count();
    MetricsReport::from_counts(tp, fp, positives - tp, tn, truth.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Recall,
    Precision,
    F1,
}

/// Which measure is optimized first, and which breaks ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MetricPrefs {
    primary: Metric,
    secondary: Metric,
}

impl MetricPrefs {
    pub fn new(primary: Metric, secondary: Metric) -> Option<Self> {
        (primary != secondary).then_some(Self { primary, secondary })
    }

    pub fn primary(&self) -> Metric {
        self.primary
    }

    pub fn secondary(&self) -> Metric {
        self.secondary
    }
}

impl Default for MetricPrefs {
    fn default() -> Self {
        Self {
            primary: Metric::F1,
            secondary: Metric::Precision,
        }
    }
}

impl<'de> Deserialize<'de> for MetricPrefs {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            primary: Metric,
            secondary: Metric,
        }
        let raw = Raw::deserialize(d)?;
        MetricPrefs::new(raw.primary, raw.secondary)
            .ok_or_else(|| serde::de::Error::custom("primary and secondary metric must differ"))
    }
}

/// Lexicographic comparison on (primary, secondary); equal reports are not better.
pub fn better_than(a: &MetricsReport, b: &MetricsReport, prefs: &MetricPrefs) -> bool {
    let (pa, pb) = (a.metric(prefs.primary), b.metric(prefs.primary));
    if pa != pb {
        return pa > pb;
    }
    a.metric(prefs.secondary) > b.metric(prefs.secondary)
}
