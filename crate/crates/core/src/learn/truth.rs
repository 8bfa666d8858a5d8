//! Ground-truth files: CSV with a `source_id,target_id[,is_duplicate]` header.
//! A missing `is_duplicate` column means every row is a duplicate.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::labels::LabelSet;

#[derive(Debug, thiserror::Error)]
pub enum TruthError {
    #[error("ground truth line {line}: {reason}")]
    Row { line: u64, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    source_id: String,
    target_id: String,
    #[serde(default = "yes")]
    is_duplicate: bool,
}

fn yes() -> bool {
    true
}

pub fn read_ground_truth(reader: impl Read) -> Result<LabelSet, TruthError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut set = LabelSet::new();
    for record in rdr.records() {
        let record = record.map_err(|e| TruthError::Row {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |reason: String| TruthError::Row { line, reason };
        let row: Row = record.deserialize(Some(&headers)).map_err(|e| bad(e.to_string()))?;
        if row.source_id.is_empty() || row.target_id.is_empty() || row.source_id == row.target_id {
            return Err(bad("pair ids must be distinct and non-empty".into()));
        }
        if set
            .get(&row.source_id, &row.target_id)
            .is_some_and(|v| v != row.is_duplicate)
        {
            return Err(bad(format!(
                "conflicting labels for {} / {}",
                row.source_id, row.target_id
            )));
        }
        set.insert(&row.source_id, &row.target_id, row.is_duplicate);
    }
    Ok(set)
}

/// Writes every pair of `truth` in key order.
pub fn write_ground_truth(writer: impl Write, truth: &LabelSet) -> Result<(), TruthError> {
    let mut w = csv::Writer::from_writer(writer);
    for ((a, b), v) in truth.iter() {
        w.serialize(Row {
            source_id: a.clone(),
            target_id: b.clone(),
            is_duplicate: v,
        })?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
