//! Terms, atoms, clauses and formulas, with their parsers and clausification.

mod clausify;
mod formula;
mod parser;
mod symbols;
mod term;

pub use clausify::{check_range_restricted, clausify, clausify_with, RangeViolation, SkolemNamer};
pub use formula::{render_formula, Formula};
pub use parser::{parse_atom, parse_clause, parse_clauses, parse_formula, Parser, Signature};
pub use symbols::{canonical_symbol, symbols_of, symbols_of_clauses, SymbolSet};
pub use term::{is_reserved_symbol, render_clause, Atom, Clause, Substitution, Symbol, Term};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{kind} `{symbol}` used with arity {first} and {second}")]
    ArityConflict { kind: &'static str, symbol: String, first: usize, second: usize },
    #[error("formula has free variable(s): {0}")]
    FreeVariable(String),
    #[error("unsupported formula: {0}")]
    Fragment(String),
}
