//! The results CSV passed from `measure` to `correlate`. Scores from tools
//! outside this crate can be injected in the same format.

use std::io::{Read, Write};

use anyhow::{anyhow, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub test_id: String,
    pub item_id: String,
    pub condition_id: String,
    pub measure: String,
    /// Empty when the result is invalid.
    pub value: Option<f64>,
    pub valid: bool,
    #[serde(default)]
    pub note: String,
}

pub fn write_results(rows: &[ResultRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results(input: impl Read) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for rec in reader.deserialize() {
        let row: ResultRow = rec.map_err(|e| anyhow!("{e}"))?;
        if row.valid != row.value.is_some_and(f64::is_finite) {
            return Err(anyhow!(
                "{}/{}/{} {}: valid flag disagrees with value",
                row.test_id,
                row.item_id,
                row.condition_id,
                row.measure
            ));
        }
        rows.push(row);
    }
    Ok(rows)
}
