use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use super::ParseError;

/// Parses a single expression spanning the whole source.
pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(source)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

/// Parses a sequence of `;`-terminated top-level `let` definitions.
///
/// Consecutive clauses of the same function (`let f EQ = ..; f LT = ..;`)
/// are merged into a single [`ExprKind::ClauseFun`].
pub fn parse_defs(source: &str) -> Result<Vec<Def>, ParseError> {
    let mut p = Parser::new(source)?;
    let mut raw = Vec::new();
    while !p.at(&TokenKind::Eof) {
        p.expect(TokenKind::Let)?;
        raw.push(p.raw_binding()?);
        loop {
            if p.eat(&TokenKind::Semi) {
                if p.at_clause_continuation() {
                    raw.push(p.raw_binding()?);
                    continue;
                }
                break;
            }
            if p.at(&TokenKind::Eof) {
                break;
            }
            return Err(p.unexpected(&["`;`"]));
        }
    }
    Ok(merge_bindings(raw)?.into_iter().map(|b| Def { name: b.name, value: b.value }).collect())
}

struct RawBinding {
    name: String,
    name_span: SourceSpan,
    patterns: Vec<Pattern>,
    body: Expr,
}

fn merge_bindings(raw: Vec<RawBinding>) -> Result<Vec<Binding>, ParseError> {
    let mut out: Vec<Binding> = Vec::new();
    let mut seen: Vec<String> = Vec::new();
    let mut i = 0;
    while i < raw.len() {
        let mut j = i + 1;
        while j < raw.len() && raw[j].name == raw[i].name {
            j += 1;
        }
        let group = &raw[i..j];
        let first = &group[0];
        if seen.contains(&first.name) {
            return Err(ParseError::new(
                format!("duplicate definition of `{}`", first.name),
                first.name_span,
                Vec::new(),
            ));
        }
        let is_clause_style = group.len() > 1 || first.patterns.iter().any(|p| matches!(p, Pattern::Ctor(_)));
        let span = first.name_span.to(group[group.len() - 1].body.span);
        let value = if is_clause_style {
            if let Some(b) = group.iter().find(|b| b.patterns.is_empty()) {
                return Err(ParseError::new(
                    format!("duplicate definition of `{}`", b.name),
                    b.name_span,
                    Vec::new(),
                ));
            }
            let arity = first.patterns.len();
            if let Some(b) = group.iter().find(|b| b.patterns.len() != arity) {
                return Err(ParseError::new(
                    format!(
                        "clauses of `{}` have different numbers of arguments ({} and {})",
                        b.name,
                        arity,
                        b.patterns.len()
                    ),
                    b.name_span,
                    Vec::new(),
                ));
            }
            let clauses = group
                .iter()
                .map(|b| Clause { patterns: b.patterns.clone(), body: b.body.clone() })
                .collect();
            Expr::new(ExprKind::ClauseFun { name: first.name.clone(), clauses }, span)
        } else if first.patterns.is_empty() {
            first.body.clone()
        } else {
            let params = first
                .patterns
                .iter()
                .map(|p| match p {
                    Pattern::Var(v) => v.clone(),
                    Pattern::Ctor(_) => unreachable!("constructor patterns are clause-style"),
                })
                .collect();
            Expr::new(ExprKind::Lambda { params, body: Box::new(first.body.clone()) }, span)
        };
        seen.push(first.name.clone());
        out.push(Binding { name: first.name.clone(), value });
        i = j;
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        Ok(Self { src, tokens: tokenize(src)?, pos: 0 })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_kind_at(&self, n: usize) -> &TokenKind {
        let idx = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[idx].kind
    }

    fn at(&self, kind: &TokenKind) -> bool {
        &self.peek().kind == kind
    }

    fn advance(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.at(kind) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let tok = self.peek();
        let span = tok.span;
        let found = tok.kind.describe();
        let message = if tok.kind == TokenKind::Eof {
            "unexpected end of input".to_string()
        } else {
            format!("unexpected {found}")
        };
        debug_assert!(span.end <= self.src.len());
        ParseError::new(message, span, expected.iter().map(|s| s.to_string()).collect())
    }

    fn expect(&mut self, kind: TokenKind) -> Result<Token, ParseError> {
        if self.at(&kind) {
            Ok(self.advance())
        } else {
            Err(self.unexpected(&[&kind.describe()]))
        }
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        if self.at(&TokenKind::Eof) {
            Ok(())
        } else {
            Err(self.unexpected(&["end of input"]))
        }
    }

    fn ident(&mut self) -> Result<(String, SourceSpan), ParseError> {
        match &self.peek().kind {
            TokenKind::Ident(name) => {
                let name = name.clone();
                let span = self.advance().span;
                Ok((name, span))
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.tokens[self.pos - 1].span.end
        }
    }

    /// `f pat* =` after a `;` continues a clause-style definition.
    fn at_clause_continuation(&self) -> bool {
        if !matches!(self.peek().kind, TokenKind::Ident(_)) {
            return false;
        }
        let mut n = 1;
        loop {
            match self.peek_kind_at(n) {
                TokenKind::Ident(_) | TokenKind::Ctor(_) => n += 1,
                TokenKind::Assign => return true,
                _ => return false,
            }
        }
    }

    fn raw_binding(&mut self) -> Result<RawBinding, ParseError> {
        let (name, name_span) = self.ident()?;
        let mut patterns = Vec::new();
        loop {
            match self.peek().kind.clone() {
                TokenKind::Ident(v) => {
                    self.advance();
                    patterns.push(Pattern::Var(v));
                }
                TokenKind::Ctor(c) => {
                    let tok = self.advance();
                    let ord = OrderingLit::from_name(&c).ok_or_else(|| {
                        ParseError::new(format!("unknown constructor `{c}`"), tok.span, vec!["LT, EQ or GT".into()])
                    })?;
                    patterns.push(Pattern::Ctor(ord));
                }
                _ => break,
            }
        }
        self.expect(TokenKind::Assign)?;
        let body = self.expr()?;
        Ok(RawBinding { name, name_span, patterns, body })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        stacker::maybe_grow(64 * 1024, 1024 * 1024, || self.expr_inner())
    }

    fn expr_inner(&mut self) -> Result<Expr, ParseError> {
        let start = self.peek().span.start;
        match self.peek().kind {
            TokenKind::Let => {
                self.advance();
                let mut raw = vec![self.raw_binding()?];
                while self.eat(&TokenKind::Semi) {
                    self.eat(&TokenKind::Let);
                    raw.push(self.raw_binding()?);
                }
                self.expect(TokenKind::In)?;
                let body = self.expr()?;
                let bindings = merge_bindings(raw)?;
                let span = SourceSpan::new(start, body.span.end);
                Ok(Expr::new(ExprKind::Let { bindings, body: Box::new(body) }, span))
            }
            TokenKind::Fun => {
                self.advance();
                let mut params = vec![self.ident()?.0];
                while let TokenKind::Ident(_) = self.peek().kind {
                    params.push(self.ident()?.0);
                }
                self.expect(TokenKind::Arrow)?;
                let body = self.expr()?;
                let span = SourceSpan::new(start, body.span.end);
                Ok(Expr::new(ExprKind::Lambda { params, body: Box::new(body) }, span))
            }
            TokenKind::If => {
                self.advance();
                let cond = self.expr()?;
                self.expect(TokenKind::Then)?;
                let then_branch = self.expr()?;
                self.expect(TokenKind::Else)?;
                let else_branch = self.expr()?;
                let span = SourceSpan::new(start, else_branch.span.end);
                Ok(Expr::new(
                    ExprKind::If {
                        cond: Box::new(cond),
                        then_branch: Box::new(then_branch),
                        else_branch: Box::new(else_branch),
                    },
                    span,
                ))
            }
            _ => self.binary(1),
        }
    }

    fn binop_at(&self) -> Option<BinOp> {
        Some(match self.peek().kind {
            TokenKind::Plus => BinOp::Add,
            TokenKind::Minus => BinOp::Sub,
            TokenKind::Star => BinOp::Mul,
            TokenKind::Slash => BinOp::Div,
            TokenKind::EqEq => BinOp::Eq,
            TokenKind::Le => BinOp::Le,
            TokenKind::Lt => BinOp::Lt,
            TokenKind::Gt => BinOp::Gt,
            TokenKind::Ge => BinOp::Ge,
            TokenKind::Concat => BinOp::Concat,
            TokenKind::And => BinOp::And,
            TokenKind::Or => BinOp::Or,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.application()?;
        while let Some(op) = self.binop_at() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.advance();
            let rhs = self.binary_operand(prec + 1)?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr::new(ExprKind::BinOp { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }, span);
        }
        Ok(lhs)
    }

    /// Right operand: a `let`/`fun`/`if` may appear here and extends to the end.
    fn binary_operand(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        match self.peek().kind {
            TokenKind::Let | TokenKind::Fun | TokenKind::If => self.expr(),
            _ => self.binary(min_prec),
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek().kind,
            TokenKind::Num(_)
                | TokenKind::Str(_)
                | TokenKind::Ident(_)
                | TokenKind::Ctor(_)
                | TokenKind::True
                | TokenKind::False
                | TokenKind::LParen
                | TokenKind::LBracket
                | TokenKind::LBrace
                | TokenKind::InterpOpen
        )
    }

    fn application(&mut self) -> Result<Expr, ParseError> {
        if self.at(&TokenKind::Minus) {
            if let TokenKind::Num(n) = self.peek_kind_at(1).clone() {
                let start = self.advance().span.start;
                let end = self.advance().span.end;
                let lit = Decimal::parse(&n).expect("lexer produces valid numbers").negate();
                return Ok(Expr::new(ExprKind::Num(lit), SourceSpan::new(start, end)));
            }
            return Err(ParseError::new(
                "unary minus is only supported before a number",
                self.peek().span,
                vec!["number".into()],
            ));
        }
        let head = self.postfix()?;
        let mut args = Vec::new();
        while self.starts_atom() {
            args.push(self.postfix()?);
        }
        if args.is_empty() {
            return Ok(head);
        }
        let span = head.span.to(args[args.len() - 1].span);
        Ok(Expr::new(ExprKind::App { func: Box::new(head), args }, span))
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.atom()?;
        while self.at(&TokenKind::Dot) {
            self.advance();
            let field = match &self.peek().kind {
                TokenKind::Ident(f) | TokenKind::Ctor(f) => f.clone(),
                _ => return Err(self.unexpected(&["field name"])),
            };
            let end = self.advance().span.end;
            let span = SourceSpan::new(e.span.start, end);
            e = Expr::new(ExprKind::Field { subject: Box::new(e), field }, span);
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let tok = self.peek().clone();
        let kind = match tok.kind {
            TokenKind::Num(n) => {
                self.advance();
                ExprKind::Num(Decimal::parse(&n).expect("lexer produces valid numbers"))
            }
            TokenKind::Str(s) => {
                self.advance();
                ExprKind::Str(s)
            }
            TokenKind::True => {
                self.advance();
                ExprKind::Bool(true)
            }
            TokenKind::False => {
                self.advance();
                ExprKind::Bool(false)
            }
            TokenKind::Ident(name) => {
                self.advance();
                ExprKind::Var(name)
            }
            TokenKind::Ctor(c) => {
                self.advance();
                let ord = OrderingLit::from_name(&c).ok_or_else(|| {
                    ParseError::new(format!("unknown constructor `{c}`"), tok.span, vec!["LT, EQ or GT".into()])
                })?;
                ExprKind::Ordering(ord)
            }
            TokenKind::LParen => {
                self.advance();
                let inner = self.expr()?;
                let close = self.expect(TokenKind::RParen)?;
                return Ok(Expr::new(inner.kind, SourceSpan::new(tok.span.start, close.span.end)));
            }
            TokenKind::LBracket => return self.list(),
            TokenKind::LBrace => return self.record(),
            TokenKind::InterpOpen => return self.interp(),
            _ => {
                return Err(self.unexpected(&["expression"]));
            }
        };
        Ok(Expr::new(kind, tok.span))
    }

    fn list(&mut self) -> Result<Expr, ParseError> {
        let start = self.expect(TokenKind::LBracket)?.span.start;
        if self.at(&TokenKind::RBracket) {
            let end = self.advance().span.end;
            return Ok(Expr::new(ExprKind::List(Vec::new()), SourceSpan::new(start, end)));
        }
        let first = self.expr()?;
        if self.eat(&TokenKind::Bar) {
            let mut qualifiers = vec![self.qualifier()?];
            while self.eat(&TokenKind::Comma) {
                qualifiers.push(self.qualifier()?);
            }
            let end = self.expect(TokenKind::RBracket)?.span.end;
            return Ok(Expr::new(
                ExprKind::ListComp { head: Box::new(first), qualifiers },
                SourceSpan::new(start, end),
            ));
        }
        let mut items = vec![first];
        while self.eat(&TokenKind::Comma) {
            items.push(self.expr()?);
        }
        if !self.at(&TokenKind::RBracket) {
            return Err(self.unexpected(&["`,`", "`]`", "`|`"]));
        }
        let end = self.advance().span.end;
        Ok(Expr::new(ExprKind::List(items), SourceSpan::new(start, end)))
    }

    fn qualifier(&mut self) -> Result<Qualifier, ParseError> {
        if matches!(self.peek().kind, TokenKind::Ident(_)) && *self.peek_kind_at(1) == TokenKind::LArrow {
            let (var, _) = self.ident()?;
            self.advance();
            let source = self.expr()?;
            Ok(Qualifier::Generator { var, source })
        } else {
            Ok(Qualifier::Guard(self.expr()?))
        }
    }

    fn record(&mut self) -> Result<Expr, ParseError> {
        let start = self.expect(TokenKind::LBrace)?.span.start;
        let mut fields = Vec::new();
        if !self.at(&TokenKind::RBrace) {
            loop {
                let (name, span) = self.ident()?;
                if fields.iter().any(|(n, _): &(String, Expr)| *n == name) {
                    return Err(ParseError::new(format!("duplicate record field `{name}`"), span, Vec::new()));
                }
                self.expect(TokenKind::Colon)?;
                fields.push((name, self.expr()?));
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
        }
        if !self.at(&TokenKind::RBrace) {
            return Err(self.unexpected(&["`,`", "`}`"]));
        }
        let end = self.advance().span.end;
        Ok(Expr::new(ExprKind::Record(fields), SourceSpan::new(start, end)))
    }

    fn interp(&mut self) -> Result<Expr, ParseError> {
        let start = self.expect(TokenKind::InterpOpen)?.span.start;
        let mut segments = Vec::new();
        loop {
            match self.peek().kind.clone() {
                TokenKind::InterpText(t) => {
                    self.advance();
                    segments.push(InterpSegment::Text(t));
                }
                TokenKind::LBrace => {
                    self.advance();
                    let e = self.expr()?;
                    self.expect(TokenKind::RBrace)?;
                    segments.push(InterpSegment::Hole(e));
                }
                TokenKind::InterpClose => {
                    self.advance();
                    break;
                }
                _ => return Err(self.unexpected(&["`{`", "`\"\"\"`"])),
            }
        }
        if segments.is_empty() {
            segments.push(InterpSegment::Text(String::new()));
        }
        Ok(Expr::new(ExprKind::Interp(segments), SourceSpan::new(start, self.prev_end())))
    }
}
