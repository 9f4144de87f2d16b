use super::ast::*;

// Context levels: an expression is wrapped in parens when its own level is
// below the level its position demands.
const OPEN: u8 = 0; // let / fun / if extend as far right as possible
const APP: u8 = 7;
const ATOM: u8 = 8;

/// Renders `e` as source text that parses back to a structurally equal tree.
pub fn pretty(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, OPEN);
    out
}

/// Renders top-level definitions, one per `let`, each terminated by `;`.
pub fn pretty_defs(defs: &[Def]) -> String {
    let mut out = String::new();
    for d in defs {
        out.push_str("let ");
        write_binding(&mut out, &d.name, &d.value, "\n    ");
        out.push_str(";\n");
    }
    out
}

fn level(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Lambda { .. } | ExprKind::Let { .. } | ExprKind::If { .. } | ExprKind::ClauseFun { .. } => OPEN,
        ExprKind::BinOp { op, .. } => op.precedence(),
        ExprKind::App { .. } => APP,
        ExprKind::Num(d) if d.is_negative() => APP,
        _ => ATOM,
    }
}

fn write_expr(out: &mut String, e: &Expr, ctx: u8) {
    let wrap = level(e) < ctx;
    if wrap {
        out.push('(');
    }
    write_bare(out, e);
    if wrap {
        out.push(')');
    }
}

fn write_binding(out: &mut String, name: &str, value: &Expr, clause_sep: &str) {
    match &value.kind {
        ExprKind::ClauseFun { name: fname, clauses } if fname == name => {
            for (i, c) in clauses.iter().enumerate() {
                if i > 0 {
                    out.push(';');
                    out.push_str(clause_sep);
                }
                out.push_str(name);
                for p in &c.patterns {
                    out.push(' ');
                    match p {
                        Pattern::Var(v) => out.push_str(v),
                        Pattern::Ctor(o) => out.push_str(o.name()),
                    }
                }
                out.push_str(" = ");
                write_expr(out, &c.body, OPEN);
            }
        }
        _ => {
            out.push_str(name);
            out.push_str(" = ");
            write_expr(out, value, OPEN);
        }
    }
}

fn write_bare(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Num(d) => out.push_str(d.as_str()),
        ExprKind::Str(s) => write_string(out, s),
        ExprKind::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        ExprKind::Ordering(o) => out.push_str(o.name()),
        ExprKind::Var(v) => out.push_str(v),
        ExprKind::Lambda { params, body } => {
            out.push_str("fun");
            for p in params {
                out.push(' ');
                out.push_str(p);
            }
            out.push_str(" -> ");
            write_expr(out, body, OPEN);
        }
        ExprKind::App { func, args } => {
            write_expr(out, func, ATOM);
            for a in args {
                out.push(' ');
                write_expr(out, a, ATOM);
            }
        }
        ExprKind::Let { bindings, body } => {
            out.push_str("let ");
            for (i, b) in bindings.iter().enumerate() {
                if i > 0 {
                    out.push_str("; ");
                }
                write_binding(out, &b.name, &b.value, " ");
            }
            out.push_str(" in ");
            write_expr(out, body, OPEN);
        }
        ExprKind::ClauseFun { name, .. } => {
            // Only reachable for trees built outside the parser.
            out.push_str("let ");
            write_binding(out, name, e, " ");
            out.push_str(" in ");
            out.push_str(name);
        }
        ExprKind::Record(fields) => {
            out.push('{');
            for (i, (name, value)) in fields.iter().enumerate() {
                out.push_str(if i == 0 { " " } else { ", " });
                out.push_str(name);
                out.push_str(": ");
                write_expr(out, value, OPEN);
            }
            out.push_str(if fields.is_empty() { "}" } else { " }" });
        }
        ExprKind::Field { subject, field } => {
            write_expr(out, subject, ATOM);
            out.push('.');
            out.push_str(field);
        }
        ExprKind::List(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, item, OPEN);
            }
            out.push(']');
        }
        ExprKind::ListComp { head, qualifiers } => {
            out.push_str("[ ");
            write_expr(out, head, OPEN);
            out.push_str(" | ");
            for (i, q) in qualifiers.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                match q {
                    Qualifier::Generator { var, source } => {
                        out.push_str(var);
                        out.push_str(" <- ");
                        write_expr(out, source, OPEN);
                    }
                    Qualifier::Guard(g) => write_expr(out, g, OPEN),
                }
            }
            out.push_str(" ]");
        }
        ExprKind::If { cond, then_branch, else_branch } => {
            out.push_str("if ");
            write_expr(out, cond, OPEN);
            out.push_str(" then ");
            write_expr(out, then_branch, OPEN);
            out.push_str(" else ");
            write_expr(out, else_branch, OPEN);
        }
        ExprKind::BinOp { op, lhs, rhs } => {
            let prec = op.precedence();
            write_expr(out, lhs, prec);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_expr(out, rhs, prec + 1);
        }
        ExprKind::Interp(segments) => {
            out.push_str("\"\"\"");
            for s in segments {
                match s {
                    InterpSegment::Text(t) => write_interp_text(out, t),
                    InterpSegment::Hole(e) => {
                        out.push('{');
                        write_expr(out, e, OPEN);
                        out.push('}');
                    }
                }
            }
            out.push_str("\"\"\"");
        }
    }
}

fn write_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Escapes text for the inside of a `"""` literal.
pub fn escape_interp_text(text: &str) -> String {
    let mut out = String::new();
    write_interp_text(&mut out, text);
    out
}

fn write_interp_text(out: &mut String, text: &str) {
    for c in text.chars() {
        match c {
            '{' | '}' | '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            c => out.push(c),
        }
    }
}
