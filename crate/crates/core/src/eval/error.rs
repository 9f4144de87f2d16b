use std::fmt;

use serde::{Deserialize, Serialize};

use crate::expr::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EvalErrorKind {
    UnboundVariable,
    TypeMismatch,
    NoMatchingClause,
    KeyNotFound,
    UserError,
    DivisionByZero,
    NotCoercible,
}

impl fmt::Display for EvalErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EvalErrorKind::UnboundVariable => "unbound variable",
            EvalErrorKind::TypeMismatch => "type mismatch",
            EvalErrorKind::NoMatchingClause => "no matching clause",
            EvalErrorKind::KeyNotFound => "key not found",
            EvalErrorKind::UserError => "error",
            EvalErrorKind::DivisionByZero => "division by zero",
            EvalErrorKind::NotCoercible => "not coercible to a string",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub message: String,
    pub span: SourceSpan,
}

impl EvalError {
    pub fn new(kind: EvalErrorKind, message: impl Into<String>, span: SourceSpan) -> Self {
        Self { kind, message: message.into(), span }
    }
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.kind, self.span, self.message)
    }
}
