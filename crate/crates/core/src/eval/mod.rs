//! Provenance-tracking evaluator, builtins, prelude and dataset loading.

mod builtins;
mod dataset;
mod error;
mod interp;
mod numfmt;
mod value;

use std::sync::{Arc, OnceLock};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::expr::{parse_defs, ParseError};

pub use builtins::Builtin;
pub use dataset::{dataset_from_json, Cell, Dataset, DatasetError, Row};
pub use error::{EvalError, EvalErrorKind};
pub use interp::{apply, coerce_to_string, evaluate};
pub use numfmt::{format_fixed, num_to_str};
pub use value::{CellAddress, Callable, Closure, Env, Function, Payload, Provenance, Value};

/// Name of the table that the row helpers (`model_`, `getByYear`, ...) read.
pub const TABLE_DATA: &str = "tableData";

const PRELUDE_SOURCE: &str = include_str!("prelude.fld");
const TABLE_HELPERS_SOURCE: &str = include_str!("table_helpers.fld");

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("dataset `{name}`: {error}")]
    Dataset { name: String, error: DatasetError },
    #[error("{origin}: {error}")]
    Parse { origin: String, error: ParseError },
    #[error("{origin}: {error}")]
    Eval { origin: String, error: EvalError },
}

fn builtin(b: Builtin) -> Value {
    Value::function(Callable::Builtin(b))
}

/// Builtins plus the helper library, shared by every evaluation.
pub fn prelude() -> Env {
    static PRELUDE: OnceLock<Env> = OnceLock::new();
    PRELUDE
        .get_or_init(|| {
            let env = Builtin::ALL.iter().fold(Env::empty(), |env, b| env.bind(b.name(), builtin(*b)));
            extend_with_defs(&env, PRELUDE_SOURCE, "prelude").expect("prelude is well formed")
        })
        .clone()
}

/// Binds `name` to the table's rows. Loading `tableData` also binds the
/// helpers that read the current table.
pub fn load_dataset(env: &Env, name: &str, ds: &Dataset) -> Result<Env, EnvError> {
    ds.validate().map_err(|error| EnvError::Dataset { name: name.to_string(), error })?;
    let rows = ds.to_value(name);
    let mut env = env.bind(name, rows.clone());
    if name == TABLE_DATA {
        let model = Value::new(
            Payload::Function(Arc::new(Function { callable: Callable::Builtin(Builtin::ModelWithDefault), applied: vec![rows] })),
            Provenance::empty(),
        );
        env = env.bind("model_", model);
        env = extend_with_defs(&env, TABLE_HELPERS_SOURCE, "table helpers")?;
    }
    Ok(env)
}

/// Parses `source` as a sequence of `let` definitions and binds them in order.
pub fn extend_with_defs(env: &Env, source: &str, origin: &str) -> Result<Env, EnvError> {
    let defs = parse_defs(source).map_err(|error| EnvError::Parse { origin: origin.to_string(), error })?;
    let mut env = env.clone();
    let mut m = interp::Machine::default();
    for d in defs {
        let v = m
            .eval_binding(&d.name, &d.value, &env)
            .map_err(|error| EnvError::Eval { origin: origin.to_string(), error })?;
        env = env.bind(d.name, v);
    }
    Ok(env)
}

/// Everything an expression may refer to besides the prelude: tables,
/// imported definition files and the document's own definitions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Sources {
    pub datasets: IndexMap<String, Dataset>,
    /// Contents of imported definition files, in import order.
    pub imports: Vec<String>,
    pub code: String,
}

impl Sources {
    /// Prelude, then datasets, then imports, then code.
    pub fn env(&self) -> Result<Env, EnvError> {
        let mut env = prelude();
        for (name, ds) in &self.datasets {
            env = load_dataset(&env, name, ds)?;
        }
        for (i, src) in self.imports.iter().enumerate() {
            env = extend_with_defs(&env, src, &format!("import {}", i + 1))?;
        }
        extend_with_defs(&env, &self.code, "code")
    }
}
