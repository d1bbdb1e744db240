//! The intentional query language: intentions over cubes and the textual form
//! of cube queries.

mod ast;
mod lexer;
mod parser;
mod render;

pub use ast::{By, Intention, ModelCall, Statement, Verb};
pub use lexer::position;
pub use parser::{parse_cube_query, parse_intention, parse_statement};
pub use render::{render_condition, render_cube_query, render_intention, render_statement};

/// Keywords are reserved case-insensitively.
pub const KEYWORDS: &[&str] = &[
    "with", "describe", "assess", "explain", "predict", "suggest", "for", "by", "size", "using", "against", "next",
    "points", "of", "over", "and", "or", "not", "true", "false", "cube", "where", "group", "agg",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(s))
}

/// A syntax error with its position (1-based line and column, 0-based byte
/// offset) and the set of tokens that would have been accepted.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}, column {column}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub message: String,
    pub line: usize,
    pub column: usize,
    pub offset: usize,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(", "))
    }
}
