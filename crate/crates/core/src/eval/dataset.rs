use std::fmt;

use indexmap::IndexMap;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

use super::value::{CellAddress, Provenance, Value};

/// A scalar table cell. Numbers compare by value, so `250` equals `250.0`.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(serde_json::Number),
    Str(String),
}

impl Cell {
    pub fn num(n: f64) -> Self {
        serde_json::Number::from_f64(n).map(Cell::Num).unwrap_or_else(|| Cell::Str(n.to_string()))
    }

    pub fn to_value(&self) -> Value {
        match self {
            Cell::Num(n) => Value::num(n.as_f64().unwrap_or(f64::NAN)),
            Cell::Str(s) => Value::str(s.clone()),
        }
    }
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Cell::Num(a), Cell::Num(b)) => a.as_f64() == b.as_f64(),
            (Cell::Str(a), Cell::Str(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(n) => write!(f, "{n}"),
            Cell::Str(s) => f.write_str(s),
        }
    }
}

impl TryFrom<serde_json::Value> for Cell {
    type Error = String;

    fn try_from(v: serde_json::Value) -> Result<Self, Self::Error> {
        match v {
            serde_json::Value::Number(n) => Ok(Cell::Num(n)),
            serde_json::Value::String(s) => Ok(Cell::Str(s)),
            other => Err(format!("cell values must be numbers or strings, found {other}")),
        }
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Cell::try_from(serde_json::Value::deserialize(d)?).map_err(D::Error::custom)
    }
}

pub type Row = IndexMap<String, Cell>;

/// Rows of a table as they appear in a project file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Dataset {
    pub rows: Vec<Row>,
}

impl Dataset {
    pub fn new(rows: Vec<Row>) -> Self {
        Self { rows }
    }

    /// Rejects tables whose rows do not all share the first row's key set.
    pub fn validate(&self) -> Result<(), DatasetError> {
        let Some(first) = self.rows.first() else { return Ok(()) };
        for (i, row) in self.rows.iter().enumerate().skip(1) {
            let same = row.len() == first.len() && row.keys().all(|k| first.contains_key(k));
            if !same {
                return Err(DatasetError::Ragged {
                    row: i,
                    expected: first.keys().cloned().collect(),
                    found: row.keys().cloned().collect(),
                });
            }
        }
        Ok(())
    }

    /// The table as a list of records whose cells carry their own address.
    pub fn to_value(&self, name: &str) -> Value {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let fields = row
                    .iter()
                    .map(|(k, c)| (k.clone(), c.to_value().with_prov(&Provenance::cell(CellAddress::new(name, i, k)))))
                    .collect();
                Value::record(fields)
            })
            .collect();
        Value::list(rows)
    }

    pub fn cell(&self, addr: &CellAddress) -> Option<&Cell> {
        self.rows.get(addr.row)?.get(&addr.field)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("row {row} has fields [{}] but row 0 has [{}]", found.join(", "), expected.join(", "))]
    Ragged { row: usize, expected: Vec<String>, found: Vec<String> },
    #[error("invalid dataset: {0}")]
    Invalid(String),
}

/// Parses a JSON array of flat records into a dataset.
pub fn dataset_from_json(json: &serde_json::Value) -> Result<Dataset, DatasetError> {
    let ds: Dataset = serde_json::from_value(json.clone()).map_err(|e| DatasetError::Invalid(e.to_string()))?;
    ds.validate()?;
    Ok(ds)
}
