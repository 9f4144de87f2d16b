use std::fmt;

use super::ast::SourceSpan;
use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Num(String),
    Str(String),
    Ident(String),
    /// Capitalised identifier (only `LT`, `EQ`, `GT` are meaningful).
    Ctor(String),
    Let,
    In,
    Fun,
    If,
    Then,
    Else,
    True,
    False,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Dot,
    Assign,
    Arrow,
    LArrow,
    Bar,
    Plus,
    Minus,
    Star,
    Slash,
    EqEq,
    Le,
    Lt,
    Gt,
    Ge,
    Concat,
    And,
    Or,
    /// Opening `"""` of an interpolated string.
    InterpOpen,
    /// Literal text inside an interpolated string, escapes resolved.
    InterpText(String),
    /// Closing `"""`.
    InterpClose,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Num(n) => format!("number {n}"),
            TokenKind::Str(s) => format!("string {s:?}"),
            TokenKind::Ident(i) => format!("identifier `{i}`"),
            TokenKind::Ctor(c) => format!("constructor `{c}`"),
            TokenKind::InterpText(_) => "string text".to_string(),
            TokenKind::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            TokenKind::Let => "let",
            TokenKind::In => "in",
            TokenKind::Fun => "fun",
            TokenKind::If => "if",
            TokenKind::Then => "then",
            TokenKind::Else => "else",
            TokenKind::True => "true",
            TokenKind::False => "false",
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBracket => "[",
            TokenKind::RBracket => "]",
            TokenKind::LBrace => "{",
            TokenKind::RBrace => "}",
            TokenKind::Comma => ",",
            TokenKind::Semi => ";",
            TokenKind::Colon => ":",
            TokenKind::Dot => ".",
            TokenKind::Assign => "=",
            TokenKind::Arrow => "->",
            TokenKind::LArrow => "<-",
            TokenKind::Bar => "|",
            TokenKind::Plus => "+",
            TokenKind::Minus => "-",
            TokenKind::Star => "*",
            TokenKind::Slash => "/",
            TokenKind::EqEq => "==",
            TokenKind::Le => "<=",
            TokenKind::Lt => "<",
            TokenKind::Gt => ">",
            TokenKind::Ge => ">=",
            TokenKind::Concat => "++",
            TokenKind::And => "`and`",
            TokenKind::Or => "`or`",
            TokenKind::InterpOpen | TokenKind::InterpClose => "\"\"\"",
            _ => "?",
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

enum Mode {
    /// Ordinary code; `depth` counts open record braces so the matching `}`
    /// of an interpolation hole can be told apart.
    Code { depth: usize },
    Interp,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    modes: Vec<Mode>,
    tokens: Vec<Token>,
}

/// Splits `source` into tokens, ending with [`TokenKind::Eof`].
pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut lx = Lexer { src: source, pos: 0, modes: vec![Mode::Code { depth: 0 }], tokens: Vec::new() };
    lx.run()?;
    Ok(lx.tokens)
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn push(&mut self, kind: TokenKind, start: usize) {
        self.tokens.push(Token { kind, span: SourceSpan::new(start, self.pos) });
    }

    fn run(&mut self) -> Result<(), ParseError> {
        loop {
            match self.modes.last() {
                Some(Mode::Interp) => self.interp_text()?,
                _ => {
                    if !self.code_token()? {
                        break;
                    }
                }
            }
        }
        if self.modes.len() > 1 {
            // Only reachable when an interpolation hole is left open.
            return Err(ParseError::new(
                "unterminated triple-quoted string",
                SourceSpan::new(self.src.len(), self.src.len()),
                vec!["`}`".into()],
            ));
        }
        let end = self.src.len();
        self.tokens.push(Token { kind: TokenKind::Eof, span: SourceSpan::new(end, end) });
        Ok(())
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('-') if self.peek_at(1) == Some('-') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
    }

    /// Lexes one code token. Returns false at end of input.
    fn code_token(&mut self) -> Result<bool, ParseError> {
        self.skip_trivia();
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Ok(false);
        };

        if self.rest().starts_with("\"\"\"") {
            self.pos += 3;
            self.push(TokenKind::InterpOpen, start);
            self.modes.push(Mode::Interp);
            return Ok(true);
        }
        if c == '"' {
            self.string_literal(start)?;
            return Ok(true);
        }
        if c.is_ascii_digit() {
            self.number(start);
            return Ok(true);
        }
        if c.is_alphabetic() || c == '_' {
            self.word(start);
            return Ok(true);
        }
        if c == '`' {
            return self.backtick(start).map(|_| true);
        }

        let two = self.rest().get(..2).unwrap_or("");
        let kind = match two {
            "->" => Some(TokenKind::Arrow),
            "<-" => Some(TokenKind::LArrow),
            "==" => Some(TokenKind::EqEq),
            "<=" => Some(TokenKind::Le),
            ">=" => Some(TokenKind::Ge),
            "++" => Some(TokenKind::Concat),
            _ => None,
        };
        if let Some(kind) = kind {
            self.pos += 2;
            self.push(kind, start);
            return Ok(true);
        }

        self.bump();
        let kind = match c {
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            '[' => TokenKind::LBracket,
            ']' => TokenKind::RBracket,
            '{' => {
                if let Some(Mode::Code { depth }) = self.modes.last_mut() {
                    *depth += 1;
                }
                TokenKind::LBrace
            }
            '}' => {
                let closes_hole = matches!(self.modes.last(), Some(Mode::Code { depth: 0 })) && self.modes.len() > 1;
                if closes_hole {
                    self.modes.pop();
                } else if let Some(Mode::Code { depth }) = self.modes.last_mut() {
                    *depth = depth.saturating_sub(1);
                }
                TokenKind::RBrace
            }
            ',' => TokenKind::Comma,
            ';' => TokenKind::Semi,
            ':' => TokenKind::Colon,
            '.' => TokenKind::Dot,
            '=' => TokenKind::Assign,
            '|' => TokenKind::Bar,
            '+' => TokenKind::Plus,
            '-' => TokenKind::Minus,
            '*' => TokenKind::Star,
            '/' => TokenKind::Slash,
            '<' => TokenKind::Lt,
            '>' => TokenKind::Gt,
            other => {
                return Err(ParseError::new(
                    format!("illegal character {other:?}"),
                    SourceSpan::new(start, self.pos),
                    Vec::new(),
                ))
            }
        };
        self.push(kind, start);
        Ok(true)
    }

    fn string_literal(&mut self, start: usize) -> Result<(), ParseError> {
        self.bump();
        let mut text = String::new();
        loop {
            match self.bump() {
                None => {
                    return Err(ParseError::new(
                        "unterminated string",
                        SourceSpan::new(start, self.pos),
                        vec!["`\"`".into()],
                    ))
                }
                Some('"') => break,
                Some('\\') => match self.bump() {
                    Some('n') => text.push('\n'),
                    Some('t') => text.push('\t'),
                    Some('"') => text.push('"'),
                    Some('\\') => text.push('\\'),
                    Some(other) => {
                        text.push('\\');
                        text.push(other);
                    }
                    None => {
                        return Err(ParseError::new(
                            "unterminated string",
                            SourceSpan::new(start, self.pos),
                            vec!["`\"`".into()],
                        ))
                    }
                },
                Some(c) => text.push(c),
            }
        }
        self.push(TokenKind::Str(text), start);
        Ok(())
    }

    fn number(&mut self, start: usize) {
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
            }
        }
        let text = self.src[start..self.pos].to_string();
        self.push(TokenKind::Num(text), start);
    }

    fn word(&mut self, start: usize) {
        while self.peek().is_some_and(|c| c.is_alphanumeric() || c == '_' || c == '\'') {
            self.bump();
        }
        let word = &self.src[start..self.pos];
        let kind = match word {
            "let" => TokenKind::Let,
            "in" => TokenKind::In,
            "fun" => TokenKind::Fun,
            "if" => TokenKind::If,
            "then" => TokenKind::Then,
            "else" => TokenKind::Else,
            "true" => TokenKind::True,
            "false" => TokenKind::False,
            w if w.starts_with(|c: char| c.is_uppercase()) => TokenKind::Ctor(w.to_string()),
            w => TokenKind::Ident(w.to_string()),
        };
        self.push(kind, start);
    }

    fn backtick(&mut self, start: usize) -> Result<(), ParseError> {
        self.bump();
        let name_start = self.pos;
        while self.peek().is_some_and(|c| c != '`' && c != '\n') {
            self.bump();
        }
        let name = &self.src[name_start..self.pos];
        if self.bump() != Some('`') {
            return Err(ParseError::new(
                "unterminated backtick operator",
                SourceSpan::new(start, self.pos),
                vec!["`".into()],
            ));
        }
        let kind = match name {
            "and" => TokenKind::And,
            "or" => TokenKind::Or,
            other => {
                return Err(ParseError::new(
                    format!("unknown infix operator `{other}`"),
                    SourceSpan::new(start, self.pos),
                    vec!["`and`".into(), "`or`".into()],
                ))
            }
        };
        self.push(kind, start);
        Ok(())
    }

    fn interp_text(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        let mut text = String::new();
        loop {
            if self.rest().starts_with("\"\"\"") {
                if !text.is_empty() {
                    self.push(TokenKind::InterpText(std::mem::take(&mut text)), start);
                }
                let close = self.pos;
                self.pos += 3;
                self.push(TokenKind::InterpClose, close);
                self.modes.pop();
                return Ok(());
            }
            match self.peek() {
                None => {
                    return Err(ParseError::new(
                        "unterminated triple-quoted string",
                        SourceSpan::new(start, self.pos),
                        vec!["`\"\"\"`".into()],
                    ))
                }
                Some('{') => {
                    if !text.is_empty() {
                        self.push(TokenKind::InterpText(std::mem::take(&mut text)), start);
                    }
                    let brace = self.pos;
                    self.bump();
                    self.push(TokenKind::LBrace, brace);
                    self.modes.push(Mode::Code { depth: 0 });
                    return Ok(());
                }
                Some('\\') => {
                    self.bump();
                    match self.bump() {
                        Some(c @ ('{' | '}' | '"' | '\\')) => text.push(c),
                        Some(other) => {
                            text.push('\\');
                            text.push(other);
                        }
                        None => text.push('\\'),
                    }
                }
                Some(c) => {
                    self.bump();
                    text.push(c);
                }
            }
        }
    }
}
