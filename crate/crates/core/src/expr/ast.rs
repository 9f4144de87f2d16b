use std::fmt;

/// Byte range into the source text, end exclusive.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn to(self, other: SourceSpan) -> SourceSpan {
        SourceSpan::new(self.start.min(other.start), self.end.max(other.end))
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// A numeric literal kept exactly as written (`52.80` stays `52.80`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Decimal(String);

impl Decimal {
    /// Accepts `-?digits(.digits)?`.
    pub fn parse(text: &str) -> Option<Self> {
        let body = text.strip_prefix('-').unwrap_or(text);
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (body, None),
        };
        let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
        if digits(int) && frac.is_none_or(digits) {
            Some(Self(text.to_string()))
        } else {
            None
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_negative(&self) -> bool {
        self.0.starts_with('-')
    }

    pub fn negate(&self) -> Self {
        match self.0.strip_prefix('-') {
            Some(rest) => Self(rest.to_string()),
            None => Self(format!("-{}", self.0)),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.parse().expect("validated decimal literal")
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OrderingLit {
    Lt,
    Eq,
    Gt,
}

impl OrderingLit {
    pub fn name(self) -> &'static str {
        match self {
            OrderingLit::Lt => "LT",
            OrderingLit::Eq => "EQ",
            OrderingLit::Gt => "GT",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "LT" => Some(OrderingLit::Lt),
            "EQ" => Some(OrderingLit::Eq),
            "GT" => Some(OrderingLit::Gt),
            _ => None,
        }
    }

    pub fn from_std(ord: std::cmp::Ordering) -> Self {
        match ord {
            std::cmp::Ordering::Less => OrderingLit::Lt,
            std::cmp::Ordering::Equal => OrderingLit::Eq,
            std::cmp::Ordering::Greater => OrderingLit::Gt,
        }
    }

    pub fn to_std(self) -> std::cmp::Ordering {
        match self {
            OrderingLit::Lt => std::cmp::Ordering::Less,
            OrderingLit::Eq => std::cmp::Ordering::Equal,
            OrderingLit::Gt => std::cmp::Ordering::Greater,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Le,
    Lt,
    Gt,
    Ge,
    Concat,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Eq => "==",
            BinOp::Le => "<=",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Concat => "++",
            BinOp::And => "`and`",
            BinOp::Or => "`or`",
        }
    }

    /// Binding strength; higher binds tighter. All levels are left-associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Le | BinOp::Lt | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Concat => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Pattern {
    Var(String),
    Ctor(OrderingLit),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub patterns: Vec<Pattern>,
    pub body: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Binding {
    pub name: String,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Qualifier {
    Generator { var: String, source: Expr },
    Guard(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InterpSegment {
    Text(String),
    Hole(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Num(Decimal),
    Str(String),
    Bool(bool),
    Ordering(OrderingLit),
    Var(String),
    Lambda { params: Vec<String>, body: Box<Expr> },
    App { func: Box<Expr>, args: Vec<Expr> },
    Let { bindings: Vec<Binding>, body: Box<Expr> },
    /// Function defined by pattern clauses, e.g. `growShrink EQ = ...; growShrink LT = ...`.
    ClauseFun { name: String, clauses: Vec<Clause> },
    Record(Vec<(String, Expr)>),
    Field { subject: Box<Expr>, field: String },
    List(Vec<Expr>),
    ListComp { head: Box<Expr>, qualifiers: Vec<Qualifier> },
    If { cond: Box<Expr>, then_branch: Box<Expr>, else_branch: Box<Expr> },
    BinOp { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Interp(Vec<InterpSegment>),
}

/// Syntax tree node. Equality is structural and ignores spans.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: SourceSpan,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: SourceSpan) -> Self {
        Self { kind, span }
    }

    /// Node with a zero span, for trees built in code.
    pub fn synthetic(kind: ExprKind) -> Self {
        Self { kind, span: SourceSpan::default() }
    }

    pub fn var(name: &str) -> Self {
        Self::synthetic(ExprKind::Var(name.to_string()))
    }

    pub fn str_lit(text: &str) -> Self {
        Self::synthetic(ExprKind::Str(text.to_string()))
    }

    pub fn num(text: &str) -> Self {
        Self::synthetic(ExprKind::Num(Decimal::parse(text).expect("numeric literal")))
    }

    pub fn app(func: Expr, args: Vec<Expr>) -> Self {
        Self::synthetic(ExprKind::App { func: Box::new(func), args })
    }

    pub fn field(subject: Expr, field: &str) -> Self {
        Self::synthetic(ExprKind::Field { subject: Box::new(subject), field: field.to_string() })
    }

    pub fn binop(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Self::synthetic(ExprKind::BinOp { op, lhs: Box::new(lhs), rhs: Box::new(rhs) })
    }

    /// Pre-order traversal over this node and all sub-expressions.
    pub fn walk<'a>(&'a self, visit: &mut dyn FnMut(&'a Expr)) {
        visit(self);
        match &self.kind {
            ExprKind::Num(_)
            | ExprKind::Str(_)
            | ExprKind::Bool(_)
            | ExprKind::Ordering(_)
            | ExprKind::Var(_) => {}
            ExprKind::Lambda { body, .. } => body.walk(visit),
            ExprKind::App { func, args } => {
                func.walk(visit);
                args.iter().for_each(|a| a.walk(visit));
            }
            ExprKind::Let { bindings, body } => {
                bindings.iter().for_each(|b| b.value.walk(visit));
                body.walk(visit);
            }
            ExprKind::ClauseFun { clauses, .. } => clauses.iter().for_each(|c| c.body.walk(visit)),
            ExprKind::Record(fields) => fields.iter().for_each(|(_, e)| e.walk(visit)),
            ExprKind::Field { subject, .. } => subject.walk(visit),
            ExprKind::List(items) => items.iter().for_each(|e| e.walk(visit)),
            ExprKind::ListComp { head, qualifiers } => {
                head.walk(visit);
                for q in qualifiers {
                    match q {
                        Qualifier::Generator { source, .. } => source.walk(visit),
                        Qualifier::Guard(g) => g.walk(visit),
                    }
                }
            }
            ExprKind::If { cond, then_branch, else_branch } => {
                cond.walk(visit);
                then_branch.walk(visit);
                else_branch.walk(visit);
            }
            ExprKind::BinOp { lhs, rhs, .. } => {
                lhs.walk(visit);
                rhs.walk(visit);
            }
            ExprKind::Interp(segments) => {
                for s in segments {
                    if let InterpSegment::Hole(e) = s {
                        e.walk(visit);
                    }
                }
            }
        }
    }
}

/// A top-level `let` definition.
#[derive(Debug, Clone, PartialEq)]
pub struct Def {
    pub name: String,
    pub value: Expr,
}
