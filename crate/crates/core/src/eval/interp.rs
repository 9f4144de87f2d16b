use std::sync::Arc;

use indexmap::IndexMap;

use crate::expr::{BinOp, Expr, ExprKind, InterpSegment, Pattern, Qualifier, SourceSpan};

use super::builtins;
use super::error::{EvalError, EvalErrorKind};
use super::numfmt::num_to_str;
use super::value::{Callable, Closure, Env, Function, Payload, Provenance, Value};

const MAX_CALL_DEPTH: usize = 10_000;

/// Evaluates `e` in `env`.
///
/// Provenance follows values forward: literals carry none, dataset cells carry
/// their own address, primitive operations union their operands, and control
/// decisions (branch conditions, filter predicates, sort keys, lookup keys)
/// contribute nothing. Matching an ordering constructor in a clause is the one
/// exception: the clause result inherits the matched argument's provenance,
/// since the clause maps that value to a word.
pub fn evaluate(e: &Expr, env: &Env) -> Result<Value, EvalError> {
    Machine::default().eval(e, env)
}

/// Applies a function value to arguments.
pub fn apply(f: &Value, args: Vec<Value>) -> Result<Value, EvalError> {
    Machine::default().apply(f, args, SourceSpan::default())
}

/// Converts a value to display text, keeping its provenance.
pub fn coerce_to_string(v: &Value) -> Result<(String, Provenance), EvalError> {
    coerce_at(v, SourceSpan::default())
}

pub(crate) fn coerce_at(v: &Value, span: SourceSpan) -> Result<(String, Provenance), EvalError> {
    let text = match &v.payload {
        Payload::Str(s) => s.clone(),
        Payload::Num(n) => num_to_str(*n),
        Payload::Bool(b) => b.to_string(),
        _ => {
            return Err(EvalError::new(
                EvalErrorKind::NotCoercible,
                format!("cannot convert {} {} to a string", v.type_name(), v),
                span,
            ))
        }
    };
    Ok((text, v.prov.clone()))
}

pub(crate) fn type_error(expected: &str, found: &Value, span: SourceSpan) -> EvalError {
    EvalError::new(
        EvalErrorKind::TypeMismatch,
        format!("expected {expected}, found {} {}", found.type_name(), found),
        span,
    )
}

#[derive(Default)]
pub(crate) struct Machine {
    depth: usize,
}

impl Machine {
    pub(crate) fn eval(&mut self, e: &Expr, env: &Env) -> Result<Value, EvalError> {
        stacker::maybe_grow(64 * 1024, 1024 * 1024, || self.eval_inner(e, env))
    }

    fn eval_inner(&mut self, e: &Expr, env: &Env) -> Result<Value, EvalError> {
        let span = e.span;
        match &e.kind {
            ExprKind::Num(d) => Ok(Value::num(d.to_f64())),
            ExprKind::Str(s) => Ok(Value::str(s.clone())),
            ExprKind::Bool(b) => Ok(Value::bool(*b)),
            ExprKind::Ordering(o) => Ok(Value::ordering(*o)),
            ExprKind::Var(name) => env.lookup(name).cloned().ok_or_else(|| {
                EvalError::new(EvalErrorKind::UnboundVariable, format!("`{name}` is not defined"), span)
            }),
            ExprKind::Lambda { params, body } => Ok(Value::function(Callable::Closure(Arc::new(Closure::Lambda {
                params: params.clone(),
                body: Arc::new((**body).clone()),
                env: env.clone(),
                rec_name: None,
            })))),
            ExprKind::ClauseFun { name, clauses } => Ok(Value::function(Callable::Closure(Arc::new(
                Closure::Clauses { name: name.clone(), clauses: Arc::new(clauses.clone()), env: env.clone() },
            )))),
            ExprKind::App { func, args } => {
                let f = self.eval(func, env)?;
                let args = args.iter().map(|a| self.eval(a, env)).collect::<Result<Vec<_>, _>>()?;
                self.apply(&f, args, span)
            }
            ExprKind::Let { bindings, body } => {
                let mut scope = env.clone();
                for b in bindings {
                    let v = self.eval_binding(&b.name, &b.value, &scope)?;
                    scope = scope.bind(b.name.clone(), v);
                }
                self.eval(body, &scope)
            }
            ExprKind::Record(fields) => {
                let mut out = IndexMap::with_capacity(fields.len());
                for (name, fe) in fields {
                    out.insert(name.clone(), self.eval(fe, env)?);
                }
                Ok(Value::record(out))
            }
            ExprKind::Field { subject, field } => {
                let subject = self.eval(subject, env)?;
                field_of(&subject, field, span)
            }
            ExprKind::List(items) => {
                let items = items.iter().map(|i| self.eval(i, env)).collect::<Result<Vec<_>, _>>()?;
                Ok(Value::list(items))
            }
            ExprKind::ListComp { head, qualifiers } => {
                let mut out = Vec::new();
                self.comprehension(head, qualifiers, env, &mut out)?;
                Ok(Value::list(out))
            }
            ExprKind::If { cond, then_branch, else_branch } => {
                let c = self.eval(cond, env)?;
                match c.payload {
                    Payload::Bool(true) => self.eval(then_branch, env),
                    Payload::Bool(false) => self.eval(else_branch, env),
                    _ => Err(type_error("a boolean condition", &c, cond.span)),
                }
            }
            ExprKind::BinOp { op, lhs, rhs } => {
                let a = self.eval(lhs, env)?;
                let b = self.eval(rhs, env)?;
                binop(*op, &a, &b, span)
            }
            ExprKind::Interp(segments) => {
                let mut text = String::new();
                let mut prov = Provenance::empty();
                for s in segments {
                    match s {
                        InterpSegment::Text(t) => text.push_str(t),
                        InterpSegment::Hole(h) => {
                            let v = self.eval(h, env)?;
                            let (t, p) = coerce_at(&v, h.span)?;
                            text.push_str(&t);
                            prov.extend(&p);
                        }
                    }
                }
                Ok(Value::new(Payload::Str(text), prov))
            }
        }
    }

    /// Function bindings may refer to themselves by name.
    pub(crate) fn eval_binding(&mut self, name: &str, value: &Expr, env: &Env) -> Result<Value, EvalError> {
        match &value.kind {
            ExprKind::Lambda { params, body } => Ok(Value::function(Callable::Closure(Arc::new(Closure::Lambda {
                params: params.clone(),
                body: Arc::new((**body).clone()),
                env: env.clone(),
                rec_name: Some(name.to_string()),
            })))),
            _ => self.eval(value, env),
        }
    }

    fn comprehension(
        &mut self,
        head: &Expr,
        qualifiers: &[Qualifier],
        env: &Env,
        out: &mut Vec<Value>,
    ) -> Result<(), EvalError> {
        let Some((first, rest)) = qualifiers.split_first() else {
            out.push(self.eval(head, env)?);
            return Ok(());
        };
        match first {
            Qualifier::Generator { var, source } => {
                let src = self.eval(source, env)?;
                let items = src.as_list().ok_or_else(|| type_error("a list", &src, source.span))?.clone();
                for item in items.iter() {
                    self.comprehension(head, rest, &env.bind(var.clone(), item.clone()), out)?;
                }
                Ok(())
            }
            Qualifier::Guard(g) => {
                let c = self.eval(g, env)?;
                match c.payload {
                    Payload::Bool(true) => self.comprehension(head, rest, env, out),
                    Payload::Bool(false) => Ok(()),
                    _ => Err(type_error("a boolean guard", &c, g.span)),
                }
            }
        }
    }

    pub(crate) fn apply(&mut self, f: &Value, args: Vec<Value>, span: SourceSpan) -> Result<Value, EvalError> {
        let Payload::Function(func) = &f.payload else {
            return Err(EvalError::new(
                EvalErrorKind::TypeMismatch,
                format!("cannot apply {} {} to arguments", f.type_name(), f),
                span,
            ));
        };
        let mut all = func.applied.clone();
        all.extend(args);
        let (min, max) = match &func.callable {
            Callable::Closure(c) => (c.arity(), c.arity()),
            Callable::Builtin(b) => b.arity(),
        };
        if all.len() < min {
            return Ok(Value::new(
                Payload::Function(Arc::new(Function { callable: func.callable.clone(), applied: all })),
                Provenance::empty(),
            ));
        }
        let rest = all.split_off(all.len().min(max));

        self.depth += 1;
        if self.depth > MAX_CALL_DEPTH {
            self.depth -= 1;
            return Err(EvalError::new(
                EvalErrorKind::UserError,
                format!("call depth limit of {MAX_CALL_DEPTH} exceeded"),
                span,
            ));
        }
        let result = match &func.callable {
            Callable::Closure(c) => self.call_closure(c, all, span),
            Callable::Builtin(b) => builtins::call(self, *b, all, span),
        };
        self.depth -= 1;

        let result = result?;
        if rest.is_empty() {
            Ok(result)
        } else {
            self.apply(&result, rest, span)
        }
    }

    fn call_closure(&mut self, c: &Arc<Closure>, args: Vec<Value>, span: SourceSpan) -> Result<Value, EvalError> {
        match c.as_ref() {
            Closure::Lambda { params, body, env, rec_name } => {
                let mut scope = env.clone();
                if let Some(name) = rec_name {
                    scope = scope.bind(name.clone(), Value::function(Callable::Closure(c.clone())));
                }
                for (p, a) in params.iter().zip(args) {
                    scope = scope.bind(p.clone(), a);
                }
                self.eval(body, &scope)
            }
            Closure::Clauses { name, clauses, env } => {
                'clauses: for clause in clauses.iter() {
                    let mut scope = env.bind(name.clone(), Value::function(Callable::Closure(c.clone())));
                    let mut matched = Provenance::empty();
                    for (pat, arg) in clause.patterns.iter().zip(&args) {
                        match pat {
                            Pattern::Var(v) => scope = scope.bind(v.clone(), arg.clone()),
                            Pattern::Ctor(o) => match arg.payload {
                                Payload::Ordering(a) if a == *o => matched.extend(&arg.prov),
                                _ => continue 'clauses,
                            },
                        }
                    }
                    let out = self.eval(&clause.body, &scope)?;
                    return Ok(out.with_prov(&matched));
                }
                let shown: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                Err(EvalError::new(
                    EvalErrorKind::NoMatchingClause,
                    format!("no clause of `{name}` matches ({})", shown.join(", ")),
                    span,
                ))
            }
        }
    }
}

pub(crate) fn field_of(subject: &Value, field: &str, span: SourceSpan) -> Result<Value, EvalError> {
    let fields = subject.as_record().ok_or_else(|| type_error("a record", subject, span))?;
    match fields.get(field) {
        Some(v) => Ok(v.clone().with_prov(&subject.prov)),
        None => {
            let names: Vec<&str> = fields.keys().map(String::as_str).collect();
            Err(EvalError::new(
                EvalErrorKind::KeyNotFound,
                format!("record has no field `{field}` (fields: {})", names.join(", ")),
                span,
            ))
        }
    }
}

fn binop(op: BinOp, a: &Value, b: &Value, span: SourceSpan) -> Result<Value, EvalError> {
    let prov = a.provenance().union(&b.provenance());
    let payload = match op {
        BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
            let (x, y) = match (&a.payload, &b.payload) {
                (Payload::Num(x), Payload::Num(y)) => (*x, *y),
                (Payload::Num(_), _) => return Err(type_error("a number", b, span)),
                _ => return Err(type_error("a number", a, span)),
            };
            Payload::Num(match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                _ => {
                    if y == 0.0 {
                        return Err(EvalError::new(
                            EvalErrorKind::DivisionByZero,
                            format!("{} / {}", num_to_str(x), num_to_str(y)),
                            span,
                        ));
                    }
                    x / y
                }
            })
        }
        BinOp::Concat => match (&a.payload, &b.payload) {
            (Payload::Str(x), Payload::Str(y)) => Payload::Str(format!("{x}{y}")),
            (Payload::List(x), Payload::List(y)) => {
                let mut items = (**x).clone();
                items.extend(y.iter().cloned());
                // Elements keep their own provenance; the operands' list-level
                // provenance moves onto the result.
                return Ok(Value::new(Payload::List(Arc::new(items)), a.prov.union(&b.prov)));
            }
            (Payload::Str(_), _) => return Err(type_error("a string", b, span)),
            (Payload::List(_), _) => return Err(type_error("a list", b, span)),
            _ => return Err(type_error("a string or list", a, span)),
        },
        BinOp::Eq => match a.same_data(b) {
            Some(eq) => Payload::Bool(eq),
            None => {
                return Err(EvalError::new(EvalErrorKind::TypeMismatch, "functions cannot be compared", span))
            }
        },
        BinOp::Le | BinOp::Lt | BinOp::Gt | BinOp::Ge => {
            let ord = builtins::compare_values(a, b, span)?;
            Payload::Bool(match op {
                BinOp::Le => ord.is_le(),
                BinOp::Lt => ord.is_lt(),
                BinOp::Gt => ord.is_gt(),
                _ => ord.is_ge(),
            })
        }
        BinOp::And | BinOp::Or => match (&a.payload, &b.payload) {
            (Payload::Bool(x), Payload::Bool(y)) => Payload::Bool(if op == BinOp::And { *x && *y } else { *x || *y }),
            (Payload::Bool(_), _) => return Err(type_error("a boolean", b, span)),
            _ => return Err(type_error("a boolean", a, span)),
        },
    };
    Ok(Value::new(payload, prov))
}
