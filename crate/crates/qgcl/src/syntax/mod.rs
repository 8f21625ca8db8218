//! Concrete syntax: AST, parser, printer, and static checker.

pub mod ast;
pub mod check;
pub mod lexer;
pub mod library;
pub mod parser;
pub mod printer;

pub use ast::*;
pub use check::{check, Clause, Diagnostic};
pub use parser::{parse, parse_with, ParsedFile};
pub use printer::{print_file, print_program};

use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError { line, col, message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}
