//! The expression language: syntax tree, lexer, parser and pretty-printer.

mod ast;
mod lexer;
mod parser;
mod pretty;

use std::fmt;

pub use ast::*;
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse_defs, parse_expr};
pub use pretty::{escape_interp_text, pretty, pretty_defs};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ParseError {
    pub message: String,
    pub span: SourceSpan,
    /// Descriptions of tokens that would have been accepted.
    pub expected: Vec<String>,
}

impl ParseError {
    pub fn new(message: impl Into<String>, span: SourceSpan, expected: Vec<String>) -> Self {
        let message = message.into();
        debug_assert!(!message.is_empty());
        Self { message, span, expected }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at {}: {}", self.span, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}
