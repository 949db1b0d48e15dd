//! The property language: coalition operator, probability and reward queries, and an
//! eventually-path over linear state predicates.

mod ast;
mod lexer;
mod parser;

use std::fmt;

pub use ast::*;
pub use parser::{good_predicate, parse_predicate, parse_property, reward_label};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyErrorKind {
    Lexical,
    Syntax,
    Semantic,
}

/// A rejected property, located by byte offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct PropertyError {
    pub kind: PropertyErrorKind,
    pub offset: usize,
    pub message: String,
}

impl PropertyError {
    pub fn new(kind: PropertyErrorKind, offset: usize, message: impl Into<String>) -> Self {
        PropertyError {
            kind,
            offset,
            message: message.into(),
        }
    }
}

impl fmt::Display for PropertyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            PropertyErrorKind::Lexical => "lexical",
            PropertyErrorKind::Syntax => "syntax",
            PropertyErrorKind::Semantic => "semantic",
        };
        write!(f, "{kind} error at byte {}: {}", self.offset, self.message)
    }
}
