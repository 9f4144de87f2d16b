use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::eval::{Cell, Dataset, DatasetError, Row, TABLE_DATA};

/// Matches rows whose fields equal all the given values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RowSelector(pub IndexMap<String, Cell>);

impl RowSelector {
    pub fn matches(&self, row: &Row) -> bool {
        self.0.iter().all(|(k, v)| row.get(k) == Some(v))
    }
}

fn default_dataset() -> String {
    TABLE_DATA.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "op")]
pub enum Mutation {
    /// Overwrites `field` in every selected row.
    Set {
        #[serde(default = "default_dataset")]
        dataset: String,
        #[serde(rename = "where")]
        selector: RowSelector,
        field: String,
        value: Cell,
    },
    /// Appends a row, or inserts it before index `at`.
    Insert {
        #[serde(default = "default_dataset")]
        dataset: String,
        row: Row,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        at: Option<usize>,
    },
    /// Removes every selected row.
    Delete {
        #[serde(default = "default_dataset")]
        dataset: String,
        #[serde(rename = "where")]
        selector: RowSelector,
    },
}

impl Mutation {
    pub fn dataset(&self) -> &str {
        match self {
            Mutation::Set { dataset, .. } | Mutation::Insert { dataset, .. } | Mutation::Delete { dataset, .. } => {
                dataset
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MutationError {
    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),
    #[error("dataset `{dataset}` has no field `{field}`")]
    UnknownField { dataset: String, field: String },
    #[error("selector {selector} matches no row of `{dataset}`")]
    Unmatched { dataset: String, selector: String },
    #[error("insert position {at} is past the end of `{dataset}` ({len} rows)")]
    BadPosition { dataset: String, at: usize, len: usize },
    #[error("dataset `{dataset}`: {error}")]
    Dataset { dataset: String, error: DatasetError },
}

fn check_fields<'a>(ds: &Dataset, name: &str, fields: impl IntoIterator<Item = &'a String>) -> Result<(), MutationError> {
    let Some(first) = ds.rows.first() else { return Ok(()) };
    for f in fields {
        if !first.contains_key(f) {
            return Err(MutationError::UnknownField { dataset: name.to_string(), field: f.clone() });
        }
    }
    Ok(())
}

fn selected(ds: &Dataset, name: &str, sel: &RowSelector) -> Result<Vec<usize>, MutationError> {
    check_fields(ds, name, sel.0.keys())?;
    let hits: Vec<usize> = (0..ds.rows.len()).filter(|&i| sel.matches(&ds.rows[i])).collect();
    if hits.is_empty() {
        return Err(MutationError::Unmatched {
            dataset: name.to_string(),
            selector: serde_json::to_string(sel).unwrap_or_default(),
        });
    }
    Ok(hits)
}

/// Returns mutated copies of the datasets; the input is left untouched.
pub fn apply_mutations(
    datasets: &IndexMap<String, Dataset>,
    mutations: &[Mutation],
) -> Result<IndexMap<String, Dataset>, MutationError> {
    let mut out = datasets.clone();
    for m in mutations {
        let name = m.dataset();
        let ds = out.get_mut(name).ok_or_else(|| MutationError::UnknownDataset(name.to_string()))?;
        match m {
            Mutation::Set { selector, field, value, .. } => {
                check_fields(ds, name, [field])?;
                for i in selected(ds, name, selector)? {
                    ds.rows[i].insert(field.clone(), value.clone());
                }
            }
            Mutation::Insert { row, at, .. } => {
                let at = at.unwrap_or(ds.rows.len());
                if at > ds.rows.len() {
                    return Err(MutationError::BadPosition { dataset: name.to_string(), at, len: ds.rows.len() });
                }
                ds.rows.insert(at, row.clone());
            }
            Mutation::Delete { selector, .. } => {
                let hits = selected(ds, name, selector)?;
                let mut i = 0;
                ds.rows.retain(|_| {
                    let keep = !hits.contains(&i);
                    i += 1;
                    keep
                });
            }
        }
        ds.validate().map_err(|error| MutationError::Dataset { dataset: name.to_string(), error })?;
    }
    Ok(out)
}
