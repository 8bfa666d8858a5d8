//! Pair labels and the labelling queue.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::compare::{pair_key, Hundredths, ScoredPair};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Corrupt { path: PathBuf, line: usize, reason: String },
    #[error("{0}")]
    Invalid(String),
}

impl StoreError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        StoreError::Io {
            path: path.into(),
            source,
        }
    }
}

/// A labelled pair. `source_id <= target_id` always holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub source_id: String,
    pub target_id: String,
    pub is_duplicate: bool,
    pub labelled_at: DateTime<Utc>,
}

/// Labels keyed by unordered pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelSet(BTreeMap<(String, String), bool>);

impl LabelSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, a: &str, b: &str, is_duplicate: bool) {
        self.0.insert(pair_key(a, b), is_duplicate);
    }

    pub fn get(&self, a: &str, b: &str) -> Option<bool> {
        self.0.get(&pair_key(a, b)).copied()
    }

    pub fn contains(&self, a: &str, b: &str) -> bool {
        self.get(a, b).is_some()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(String, String), bool)> {
        self.0.iter().map(|(k, v)| (k, *v))
    }

    pub fn positives(&self) -> usize {
        self.0.values().filter(|v| **v).count()
    }
}

impl FromIterator<((String, String), bool)> for LabelSet {
    fn from_iter<I: IntoIterator<Item = ((String, String), bool)>>(iter: I) -> Self {
        let mut set = LabelSet::new();
        for ((a, b), v) in iter {
            set.insert(&a, &b, v);
        }
        set
    }
}

/// Upserting label store, optionally backed by an append-only JSON-lines log.
/// Replaying the log keeps the last record per pair.
#[derive(Debug, Default)]
pub struct LabelStore {
    records: BTreeMap<(String, String), LabelRecord>,
    log: Option<PathBuf>,
}

impl LabelStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (or creates on first write) the log at `path` and replays it.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let path = path.into();
        let mut records = BTreeMap::new();
        if path.exists() {
            let file = File::open(&path).map_err(|e| StoreError::io(&path, e))?;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| StoreError::io(&path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: LabelRecord = serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
                    path: path.clone(),
                    line: i + 1,
                    reason: e.to_string(),
                })?;
                records.insert(pair_key(&rec.source_id, &rec.target_id), rec);
            }
        }
        Ok(Self {
            records,
            log: Some(path),
        })
    }

    pub fn record(&mut self, a: &str, b: &str, is_duplicate: bool) -> Result<LabelRecord, StoreError> {
        self.record_at(a, b, is_duplicate, Utc::now())
    }

    /// Upserts a label; the record is durable before this returns.
    pub fn record_at(
        &mut self,
        a: &str,
        b: &str,
        is_duplicate: bool,
        at: DateTime<Utc>,
    ) -> Result<LabelRecord, StoreError> {
        if a.is_empty() || b.is_empty() {
            return Err(StoreError::Invalid("pair ids must be non-empty".into()));
        }
        if a == b {
            return Err(StoreError::Invalid(format!("cannot label {a} against itself")));
        }
        let (source_id, target_id) = pair_key(a, b);
        let rec = LabelRecord {
            source_id,
            target_id,
            is_duplicate,
            labelled_at: at,
        };
        if let Some(path) = &self.log {
            append_line(path, &serde_json::to_string(&rec).expect("labels serialize"))?;
        }
        self.records
            .insert((rec.source_id.clone(), rec.target_id.clone()), rec.clone());
        Ok(rec)
    }

    pub fn get(&self, a: &str, b: &str) -> Option<&LabelRecord> {
        self.records.get(&pair_key(a, b))
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records in pair order.
    pub fn iter(&self) -> impl Iterator<Item = &LabelRecord> {
        self.records.values()
    }

    pub fn label_set(&self) -> LabelSet {
        self.records.iter().map(|(k, r)| (k.clone(), r.is_duplicate)).collect()
    }

    /// Writes one line per pair, in pair order.
    pub fn write_compacted(&self, path: &Path) -> Result<(), StoreError> {
        let mut out = String::new();
        for rec in self.records.values() {
            out.push_str(&serde_json::to_string(rec).expect("labels serialize"));
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| StoreError::io(path, e))
    }
}

pub(crate) fn append_line(path: &Path, line: &str) -> Result<(), StoreError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| StoreError::io(dir, e))?;
    }
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| StoreError::io(path, e))?;
    writeln!(f, "{line}").map_err(|e| StoreError::io(path, e))?;
    f.sync_data().map_err(|e| StoreError::io(path, e))
}

/// Unlabelled pairs closest to the decision threshold first; ties by higher
/// similarity, then ids.
pub fn next_to_label(results: &[ScoredPair], labels: &LabelSet, threshold: Hundredths, n: usize) -> Vec<ScoredPair> {
    let t = threshold.value();
    let mut open: Vec<&ScoredPair> = results
        .iter()
        .filter(|p| !labels.contains(&p.source_id, &p.target_id))
        .collect();
    open.sort_by(|a, b| {
        (a.similarity - t)
            .abs()
            .total_cmp(&(b.similarity - t).abs())
            .then_with(|| b.similarity.total_cmp(&a.similarity))
            .then_with(|| a.source_id.cmp(&b.source_id))
            .then_with(|| a.target_id.cmp(&b.target_id))
    });
    open.into_iter().take(n).cloned().collect()
}
