use std::cmp::Ordering;
use std::sync::Arc;

use crate::expr::{OrderingLit, SourceSpan};

use super::error::{EvalError, EvalErrorKind};
use super::interp::{field_of, type_error, Machine};
use super::numfmt::{format_fixed, num_to_str};
use super::value::{Payload, Provenance, Value};

/// Natively implemented functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Map,
    Filter,
    Sum,
    Length,
    Sort,
    SortBy,
    MaximumBy,
    MinimumBy,
    Compare,
    FindWithKey,
    FindIndex,
    NumToStr,
    FormatNum,
    Error,
    Head,
    Tail,
    Reverse,
    Not,
    Get,
    OverallComparison,
    /// `model_ name rows`.
    Model,
    /// `model_` with the current table pre-applied as a hidden first
    /// argument, so both `model_ name` and `model_ name rows` work.
    ModelWithDefault,
}

impl Builtin {
    pub const ALL: [Builtin; 21] = [
        Builtin::Map,
        Builtin::Filter,
        Builtin::Sum,
        Builtin::Length,
        Builtin::Sort,
        Builtin::SortBy,
        Builtin::MaximumBy,
        Builtin::MinimumBy,
        Builtin::Compare,
        Builtin::FindWithKey,
        Builtin::FindIndex,
        Builtin::NumToStr,
        Builtin::FormatNum,
        Builtin::Error,
        Builtin::Head,
        Builtin::Tail,
        Builtin::Reverse,
        Builtin::Not,
        Builtin::Get,
        Builtin::OverallComparison,
        Builtin::Model,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Map => "map",
            Builtin::Filter => "filter",
            Builtin::Sum => "sum",
            Builtin::Length => "length",
            Builtin::Sort => "sort",
            Builtin::SortBy => "sortBy",
            Builtin::MaximumBy => "maximumBy",
            Builtin::MinimumBy => "minimumBy",
            Builtin::Compare => "compare",
            Builtin::FindWithKey => "findWithKey_",
            Builtin::FindIndex => "findIndex",
            Builtin::NumToStr => "numToStr",
            Builtin::FormatNum => "formatNum",
            Builtin::Error => "error",
            Builtin::Head => "head",
            Builtin::Tail => "tail",
            Builtin::Reverse => "reverse",
            Builtin::Not => "not",
            Builtin::Get => "get",
            Builtin::OverallComparison => "overallComparison",
            Builtin::Model | Builtin::ModelWithDefault => "model_",
        }
    }

    /// Minimum and maximum number of arguments consumed per call.
    pub fn arity(self) -> (usize, usize) {
        match self {
            Builtin::Sum
            | Builtin::Length
            | Builtin::NumToStr
            | Builtin::Error
            | Builtin::Head
            | Builtin::Tail
            | Builtin::Reverse
            | Builtin::Not
            | Builtin::OverallComparison => (1, 1),
            Builtin::Map
            | Builtin::Filter
            | Builtin::Sort
            | Builtin::SortBy
            | Builtin::MaximumBy
            | Builtin::MinimumBy
            | Builtin::Compare
            | Builtin::FormatNum
            | Builtin::Get
            | Builtin::Model => (2, 2),
            Builtin::FindWithKey | Builtin::FindIndex => (3, 3),
            Builtin::ModelWithDefault => (2, 3),
        }
    }
}

fn list_arg<'a>(v: &'a Value, what: &str, span: SourceSpan) -> Result<&'a Arc<Vec<Value>>, EvalError> {
    v.as_list().ok_or_else(|| type_error(what, v, span))
}

fn num_arg(v: &Value, span: SourceSpan) -> Result<f64, EvalError> {
    v.as_num().ok_or_else(|| type_error("a number", v, span))
}

fn str_arg(v: &Value, span: SourceSpan) -> Result<&str, EvalError> {
    v.as_str().ok_or_else(|| type_error("a string", v, span))
}

fn ordering_arg(v: &Value, span: SourceSpan) -> Result<OrderingLit, EvalError> {
    match v.payload {
        Payload::Ordering(o) => Ok(o),
        _ => Err(type_error("an ordering (LT, EQ or GT)", v, span)),
    }
}

/// Total order on numbers and on strings; anything else is a type mismatch.
pub(crate) fn compare_values(a: &Value, b: &Value, span: SourceSpan) -> Result<Ordering, EvalError> {
    match (&a.payload, &b.payload) {
        (Payload::Num(x), Payload::Num(y)) => x.partial_cmp(y).ok_or_else(|| {
            EvalError::new(EvalErrorKind::TypeMismatch, "cannot order NaN", span)
        }),
        (Payload::Str(x), Payload::Str(y)) => Ok(x.cmp(y)),
        _ => Err(EvalError::new(
            EvalErrorKind::TypeMismatch,
            format!("cannot order {} {} against {} {}", a.type_name(), a, b.type_name(), b),
            span,
        )),
    }
}

/// Stable merge sort with a fallible comparator.
fn merge_sort<T: Clone>(
    items: &[T],
    cmp: &mut dyn FnMut(&T, &T) -> Result<Ordering, EvalError>,
) -> Result<Vec<T>, EvalError> {
    if items.len() <= 1 {
        return Ok(items.to_vec());
    }
    let (l, r) = items.split_at(items.len() / 2);
    let l = merge_sort(l, cmp)?;
    let r = merge_sort(r, cmp)?;
    let mut out = Vec::with_capacity(items.len());
    let (mut i, mut j) = (0, 0);
    while i < l.len() && j < r.len() {
        if cmp(&r[j], &l[i])?.is_lt() {
            out.push(r[j].clone());
            j += 1;
        } else {
            out.push(l[i].clone());
            i += 1;
        }
    }
    out.extend_from_slice(&l[i..]);
    out.extend_from_slice(&r[j..]);
    Ok(out)
}

fn extremum_by(
    m: &mut Machine,
    f: &Value,
    xs: &Value,
    want: Ordering,
    name: &str,
    span: SourceSpan,
) -> Result<Value, EvalError> {
    let items = list_arg(xs, "a list", span)?;
    if items.is_empty() {
        return Err(EvalError::new(EvalErrorKind::UserError, format!("{name} of an empty list"), span));
    }
    let mut key_prov = Provenance::empty();
    let mut best = 0;
    let mut best_key: Option<Value> = None;
    for (i, x) in items.iter().enumerate() {
        let k = m.apply(f, vec![x.clone()], span)?;
        key_prov.extend(&k.provenance());
        let better = match &best_key {
            None => true,
            Some(b) => compare_values(&k, b, span)? == want,
        };
        if better {
            best = i;
            best_key = Some(k);
        }
    }
    // The choice depends on every key, so all keys' cells flow into the result.
    Ok(items[best].clone().with_prov(&xs.prov).with_prov(&key_prov))
}

fn find_row(key: &str, needle: &Value, rows: &[Value], span: SourceSpan) -> Result<Option<usize>, EvalError> {
    for (i, row) in rows.iter().enumerate() {
        let fields = row.as_record().ok_or_else(|| type_error("a list of records", row, span))?;
        if let Some(v) = fields.get(key) {
            if v.same_data(needle) == Some(true) {
                return Ok(Some(i));
            }
        }
    }
    Ok(None)
}

fn model(name: &Value, rows: &Value, span: SourceSpan) -> Result<Value, EvalError> {
    let items = list_arg(rows, "a list of rows", span)?;
    match find_row("model", name, items, span)? {
        Some(i) => Ok(items[i].clone().with_prov(&rows.prov)),
        None => Err(EvalError::new(EvalErrorKind::KeyNotFound, format!("no row with model = {name}"), span)),
    }
}

pub(crate) fn call(m: &mut Machine, b: Builtin, args: Vec<Value>, span: SourceSpan) -> Result<Value, EvalError> {
    let a = &args;
    match b {
        Builtin::Map => {
            let items = list_arg(&a[1], "a list", span)?;
            let out = items.iter().map(|x| m.apply(&a[0], vec![x.clone()], span)).collect::<Result<Vec<_>, _>>()?;
            Ok(Value::new(Payload::List(Arc::new(out)), a[1].prov.clone()))
        }
        Builtin::Filter => {
            let items = list_arg(&a[1], "a list", span)?;
            let mut out = Vec::new();
            for x in items.iter() {
                let keep = m.apply(&a[0], vec![x.clone()], span)?;
                match keep.payload {
                    Payload::Bool(true) => out.push(x.clone()),
                    Payload::Bool(false) => {}
                    _ => return Err(type_error("a boolean from the filter predicate", &keep, span)),
                }
            }
            Ok(Value::new(Payload::List(Arc::new(out)), a[0].prov.union(&a[1].prov)))
        }
        Builtin::Sum => {
            let items = list_arg(&a[0], "a list of numbers", span)?;
            let mut total = 0.0;
            let mut prov = a[0].prov.clone();
            for x in items.iter() {
                total += num_arg(x, span)?;
                prov.extend(&x.provenance());
            }
            Ok(Value::new(Payload::Num(total), prov))
        }
        Builtin::Length => match &a[0].payload {
            Payload::List(items) => Ok(Value::num(items.len() as f64)),
            Payload::Str(s) => Ok(Value::num(s.chars().count() as f64)),
            _ => Err(type_error("a list or string", &a[0], span)),
        },
        Builtin::Sort => {
            let items = list_arg(&a[1], "a list", span)?;
            let f = a[0].clone();
            let sorted = merge_sort(items, &mut |x, y| {
                let o = m.apply(&f, vec![x.clone(), y.clone()], span)?;
                Ok(ordering_arg(&o, span)?.to_std())
            })?;
            Ok(Value::new(Payload::List(Arc::new(sorted)), a[1].prov.clone()))
        }
        Builtin::SortBy => {
            let items = list_arg(&a[1], "a list", span)?;
            let keyed = items
                .iter()
                .map(|x| Ok((m.apply(&a[0], vec![x.clone()], span)?, x.clone())))
                .collect::<Result<Vec<_>, EvalError>>()?;
            let sorted = merge_sort(&keyed, &mut |x, y| compare_values(&x.0, &y.0, span))?;
            let out = sorted.into_iter().map(|(_, x)| x).collect();
            Ok(Value::new(Payload::List(Arc::new(out)), a[1].prov.clone()))
        }
        Builtin::MaximumBy => extremum_by(m, &a[0], &a[1], Ordering::Greater, "maximumBy", span),
        Builtin::MinimumBy => extremum_by(m, &a[0], &a[1], Ordering::Less, "minimumBy", span),
        Builtin::Compare => {
            let o = compare_values(&a[0], &a[1], span)?;
            Ok(Value::new(Payload::Ordering(OrderingLit::from_std(o)), a[0].provenance().union(&a[1].provenance())))
        }
        Builtin::FindWithKey => {
            let key = str_arg(&a[0], span)?;
            let rows = list_arg(&a[2], "a list of records", span)?;
            match find_row(key, &a[1], rows, span)? {
                Some(i) => Ok(rows[i].clone().with_prov(&a[2].prov)),
                None => Err(EvalError::new(
                    EvalErrorKind::KeyNotFound,
                    format!("no row with {key} = {}", a[1]),
                    span,
                )),
            }
        }
        Builtin::FindIndex => {
            let key = str_arg(&a[0], span)?;
            let rows = list_arg(&a[2], "a list of records", span)?;
            match find_row(key, &a[1], rows, span)? {
                Some(i) => Ok(Value::num((i + 1) as f64)),
                None => Err(EvalError::new(
                    EvalErrorKind::KeyNotFound,
                    format!("no row with {key} = {}", a[1]),
                    span,
                )),
            }
        }
        Builtin::NumToStr => {
            let n = num_arg(&a[0], span)?;
            Ok(Value::new(Payload::Str(num_to_str(n)), a[0].prov.clone()))
        }
        Builtin::FormatNum => {
            let n = num_arg(&a[0], span)?;
            let d = num_arg(&a[1], span)?;
            if !(0.0..=20.0).contains(&d) || d.fract() != 0.0 {
                return Err(EvalError::new(
                    EvalErrorKind::UserError,
                    format!("formatNum: decimal places must be a whole number from 0 to 20, got {}", num_to_str(d)),
                    span,
                ));
            }
            Ok(Value::new(Payload::Str(format_fixed(n, d as usize)), a[0].prov.clone()))
        }
        Builtin::Error => {
            let msg = match &a[0].payload {
                Payload::Str(s) => s.clone(),
                _ => a[0].to_string(),
            };
            Err(EvalError::new(EvalErrorKind::UserError, msg, span))
        }
        Builtin::Head => {
            let items = list_arg(&a[0], "a list", span)?;
            match items.first() {
                Some(x) => Ok(x.clone().with_prov(&a[0].prov)),
                None => Err(EvalError::new(EvalErrorKind::UserError, "head of an empty list", span)),
            }
        }
        Builtin::Tail => {
            let items = list_arg(&a[0], "a list", span)?;
            if items.is_empty() {
                return Err(EvalError::new(EvalErrorKind::UserError, "tail of an empty list", span));
            }
            Ok(Value::new(Payload::List(Arc::new(items[1..].to_vec())), a[0].prov.clone()))
        }
        Builtin::Reverse => {
            let items = list_arg(&a[0], "a list", span)?;
            let out = items.iter().rev().cloned().collect();
            Ok(Value::new(Payload::List(Arc::new(out)), a[0].prov.clone()))
        }
        Builtin::Not => match a[0].payload {
            Payload::Bool(x) => Ok(Value::new(Payload::Bool(!x), a[0].prov.clone())),
            _ => Err(type_error("a boolean", &a[0], span)),
        },
        Builtin::Get => {
            let key = str_arg(&a[0], span)?;
            field_of(&a[1], key, span)
        }
        Builtin::OverallComparison => {
            let items = list_arg(&a[0], "a list of orderings", span)?;
            let mut counts = [0usize; 3];
            for x in items.iter() {
                let idx = match ordering_arg(x, span)? {
                    OrderingLit::Lt => 0,
                    OrderingLit::Eq => 1,
                    OrderingLit::Gt => 2,
                };
                counts[idx] += 1;
            }
            let [lt, eq, gt] = counts;
            let winner = if lt > eq && lt > gt {
                Some(OrderingLit::Lt)
            } else if gt > eq && gt > lt {
                Some(OrderingLit::Gt)
            } else if eq > lt && eq > gt {
                Some(OrderingLit::Eq)
            } else {
                None
            };
            let mut prov = a[0].prov.clone();
            for x in items.iter() {
                if winner.is_none_or(|w| matches!(x.payload, Payload::Ordering(o) if o == w)) {
                    prov.extend(&x.provenance());
                }
            }
            Ok(Value::new(Payload::Ordering(winner.unwrap_or(OrderingLit::Eq)), prov))
        }
        Builtin::Model => model(&a[0], &a[1], span),
        Builtin::ModelWithDefault => match a.len() {
            2 => model(&a[1], &a[0], span),
            _ => model(&a[1], &a[2], span),
        },
    }
}
