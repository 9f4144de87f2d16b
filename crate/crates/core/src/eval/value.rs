use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::expr::{Clause, Expr, OrderingLit};

use super::builtins::Builtin;
use super::numfmt::num_to_str;

/// Address of one dataset cell: the unit of data linkage.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellAddress {
    pub dataset: String,
    pub row: usize,
    pub field: String,
}

impl CellAddress {
    pub fn new(dataset: &str, row: usize, field: &str) -> Self {
        Self { dataset: dataset.to_string(), row, field: field.to_string() }
    }
}

impl fmt::Display for CellAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}].{}", self.dataset, self.row, self.field)
    }
}

/// Set of cells a value was computed from. Serializes as a sorted list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Provenance(BTreeSet<CellAddress>);

impl Provenance {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn cell(addr: CellAddress) -> Self {
        Self(BTreeSet::from([addr]))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &CellAddress> {
        self.0.iter()
    }

    pub fn contains(&self, addr: &CellAddress) -> bool {
        self.0.contains(addr)
    }

    pub fn extend(&mut self, other: &Provenance) {
        self.0.extend(other.0.iter().cloned());
    }

    pub fn union(&self, other: &Provenance) -> Provenance {
        let mut out = self.clone();
        out.extend(other);
        out
    }

    pub fn intersects(&self, other: &Provenance) -> bool {
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small.0.iter().any(|a| large.0.contains(a))
    }

    pub fn is_subset(&self, other: &Provenance) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn into_vec(self) -> Vec<CellAddress> {
        self.0.into_iter().collect()
    }
}

impl FromIterator<CellAddress> for Provenance {
    fn from_iter<I: IntoIterator<Item = CellAddress>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone)]
pub enum Closure {
    Lambda {
        params: Vec<String>,
        body: Arc<Expr>,
        env: Env,
        /// Name under which the closure can refer to itself.
        rec_name: Option<String>,
    },
    Clauses {
        name: String,
        clauses: Arc<Vec<Clause>>,
        env: Env,
    },
}

impl Closure {
    pub fn arity(&self) -> usize {
        match self {
            Closure::Lambda { params, .. } => params.len(),
            Closure::Clauses { clauses, .. } => clauses.first().map_or(0, |c| c.patterns.len()),
        }
    }
}

/// A function value together with any arguments already supplied.
#[derive(Debug, Clone)]
pub enum Callable {
    Closure(Arc<Closure>),
    Builtin(Builtin),
}

#[derive(Debug, Clone)]
pub struct Function {
    pub callable: Callable,
    pub applied: Vec<Value>,
}

#[derive(Debug, Clone)]
pub enum Payload {
    Num(f64),
    Str(String),
    Bool(bool),
    Ordering(OrderingLit),
    Record(Arc<IndexMap<String, Value>>),
    List(Arc<Vec<Value>>),
    Function(Arc<Function>),
}

/// Evaluation result. `prov` holds the value's own provenance; records and
/// lists additionally carry their components' provenance (see [`Value::provenance`]).
#[derive(Debug, Clone)]
pub struct Value {
    pub payload: Payload,
    pub prov: Provenance,
}

impl Value {
    pub fn new(payload: Payload, prov: Provenance) -> Self {
        Self { payload, prov }
    }

    pub fn num(n: f64) -> Self {
        Self::new(Payload::Num(n), Provenance::empty())
    }

    pub fn str(s: impl Into<String>) -> Self {
        Self::new(Payload::Str(s.into()), Provenance::empty())
    }

    pub fn bool(b: bool) -> Self {
        Self::new(Payload::Bool(b), Provenance::empty())
    }

    pub fn ordering(o: OrderingLit) -> Self {
        Self::new(Payload::Ordering(o), Provenance::empty())
    }

    pub fn list(items: Vec<Value>) -> Self {
        Self::new(Payload::List(Arc::new(items)), Provenance::empty())
    }

    pub fn record(fields: IndexMap<String, Value>) -> Self {
        Self::new(Payload::Record(Arc::new(fields)), Provenance::empty())
    }

    pub fn function(callable: Callable) -> Self {
        Self::new(Payload::Function(Arc::new(Function { callable, applied: Vec::new() })), Provenance::empty())
    }

    pub fn with_prov(mut self, prov: &Provenance) -> Self {
        self.prov.extend(prov);
        self
    }

    /// Full provenance: own cells plus those of all components.
    pub fn provenance(&self) -> Provenance {
        let mut out = self.prov.clone();
        match &self.payload {
            Payload::Record(fields) => fields.values().for_each(|v| out.extend(&v.provenance())),
            Payload::List(items) => items.iter().for_each(|v| out.extend(&v.provenance())),
            _ => {}
        }
        out
    }

    pub fn as_num(&self) -> Option<f64> {
        match self.payload {
            Payload::Num(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match &self.payload {
            Payload::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&Arc<Vec<Value>>> {
        match &self.payload {
            Payload::List(items) => Some(items),
            _ => None,
        }
    }

    pub fn as_record(&self) -> Option<&Arc<IndexMap<String, Value>>> {
        match &self.payload {
            Payload::Record(fields) => Some(fields),
            _ => None,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self.payload {
            Payload::Num(_) => "number",
            Payload::Str(_) => "string",
            Payload::Bool(_) => "boolean",
            Payload::Ordering(_) => "ordering",
            Payload::Record(_) => "record",
            Payload::List(_) => "list",
            Payload::Function(_) => "function",
        }
    }

    /// Structural equality of payloads; provenance is ignored.
    /// Returns `None` when either side contains a function.
    pub fn same_data(&self, other: &Value) -> Option<bool> {
        Some(match (&self.payload, &other.payload) {
            (Payload::Num(a), Payload::Num(b)) => a == b,
            (Payload::Str(a), Payload::Str(b)) => a == b,
            (Payload::Bool(a), Payload::Bool(b)) => a == b,
            (Payload::Ordering(a), Payload::Ordering(b)) => a == b,
            (Payload::List(a), Payload::List(b)) => {
                if a.len() != b.len() {
                    return Some(false);
                }
                for (x, y) in a.iter().zip(b.iter()) {
                    if !x.same_data(y)? {
                        return Some(false);
                    }
                }
                true
            }
            (Payload::Record(a), Payload::Record(b)) => {
                if a.len() != b.len() {
                    return Some(false);
                }
                for (k, x) in a.iter() {
                    match b.get(k) {
                        Some(y) => {
                            if !x.same_data(y)? {
                                return Some(false);
                            }
                        }
                        None => return Some(false),
                    }
                }
                true
            }
            (Payload::Function(_), _) | (_, Payload::Function(_)) => return None,
            _ => false,
        })
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.payload {
            Payload::Num(n) => f.write_str(&num_to_str(*n)),
            Payload::Str(s) => write!(f, "{s:?}"),
            Payload::Bool(b) => write!(f, "{b}"),
            Payload::Ordering(o) => f.write_str(o.name()),
            Payload::Record(fields) => {
                f.write_str("{")?;
                for (i, (k, v)) in fields.iter().enumerate() {
                    write!(f, "{}{k}: {v}", if i == 0 { " " } else { ", " })?;
                }
                f.write_str(if fields.is_empty() { "}" } else { " }" })
            }
            Payload::List(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
            Payload::Function(func) => match &func.callable {
                Callable::Closure(c) => match c.as_ref() {
                    Closure::Clauses { name, .. } => write!(f, "<function {name}>"),
                    Closure::Lambda { rec_name: Some(name), .. } => write!(f, "<function {name}>"),
                    Closure::Lambda { .. } => f.write_str("<function>"),
                },
                Callable::Builtin(b) => write!(f, "<builtin {}>", b.name()),
            },
        }
    }
}

/// Persistent, lexically scoped environment. Cloning is cheap.
#[derive(Debug, Clone, Default)]
pub struct Env(Option<Arc<Frame>>);

#[derive(Debug)]
struct Frame {
    name: String,
    value: Value,
    next: Env,
}

impl Env {
    pub fn empty() -> Self {
        Self(None)
    }

    pub fn bind(&self, name: impl Into<String>, value: Value) -> Env {
        Env(Some(Arc::new(Frame { name: name.into(), value, next: self.clone() })))
    }

    pub fn lookup(&self, name: &str) -> Option<&Value> {
        let mut cur = self.0.as_deref();
        while let Some(frame) = cur {
            if frame.name == name {
                return Some(&frame.value);
            }
            cur = frame.next.0.as_deref();
        }
        None
    }

    /// Bound names, innermost first, shadowed duplicates removed.
    pub fn names(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        let mut cur = self.0.as_deref();
        while let Some(frame) = cur {
            if !out.contains(&frame.name.as_str()) {
                out.push(&frame.name);
            }
            cur = frame.next.0.as_deref();
        }
        out
    }
}

impl Drop for Frame {
    // Unlink iteratively so long environments don't overflow the stack.
    fn drop(&mut self) {
        let mut next = self.next.0.take();
        while let Some(frame) = next {
            match Arc::try_unwrap(frame) {
                Ok(mut inner) => next = inner.next.0.take(),
                Err(_) => break,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_provenance_is_union_of_components() {
        let a = Value::num(1.0).with_prov(&Provenance::cell(CellAddress::new("t", 0, "a")));
        let b = Value::num(2.0).with_prov(&Provenance::cell(CellAddress::new("t", 0, "b")));
        let mut fields = IndexMap::new();
        fields.insert("a".to_string(), a);
        fields.insert("b".to_string(), b);
        let r = Value::record(fields);
        assert!(r.prov.is_empty());
        assert_eq!(r.provenance().len(), 2);
    }

    #[test]
    fn env_shadowing() {
        let env = Env::empty().bind("x", Value::num(1.0)).bind("x", Value::num(2.0));
        assert_eq!(env.lookup("x").unwrap().as_num(), Some(2.0));
        assert!(env.lookup("y").is_none());
        assert_eq!(env.names(), vec!["x"]);
    }
}
