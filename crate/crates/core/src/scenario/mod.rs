//! A small line-oriented language for describing experiments and asking
//! questions about them.
//!
//! ```text
//! dim 4
//! init |00>
//! slot unitary=H (x) I(2) frame=comp(2)
//! slot unitary=CNOT frame=comp(2)
//! query prob next 11
//! ```
//!
//! Slots are numbered from 1 in the language (slot `k` is time `t_k`).

use std::fmt;

pub mod ast;
mod compile;
mod golden;
mod lexer;
mod output;
mod parser;
mod render;
mod run;

pub use ast::{Document, Pos};
pub use compile::{compile, Action, CompiledQuery, Scenario, MAX_DIM};
pub use golden::{golden_scenarios, golden_source, GOLDEN};
pub use output::{human, to_json, to_table, Entry, HistoryRow, Num, QueryResult, Value};
pub use parser::parse_syntax;
pub use render::{render, render_expr, render_query, render_statement};
pub use run::{run_query, run_scenario};

/// A positioned problem with a scenario text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub pos: Pos,
    pub message: String,
}

impl Diagnostic {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        Self { pos, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

#[derive(Debug)]
pub enum ScenarioError {
    /// Lexical, syntactic or semantic problems; nothing was run.
    Invalid(Vec<Diagnostic>),
    /// A query failed inside the engine.
    Engine { query: String, pos: Pos, error: crate::Error },
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Invalid(errors) => {
                for (i, e) in errors.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "{e}")?;
                }
                Ok(())
            }
            ScenarioError::Engine { query, pos, error } => write!(f, "{pos}: query `{query}` failed: {error}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

/// Parses and checks a document: syntax, names, dimensions and schedule
/// validity. The returned tree is the syntax tree; use [`compile`] for the
/// schedule.
pub fn parse(text: &str) -> Result<Document, Vec<Diagnostic>> {
    let doc = parse_syntax(text)?;
    compile(&doc)?;
    Ok(doc)
}

/// Runs every query of a document, in order.
pub fn run_queries(doc: &Document) -> Result<Vec<QueryResult>, ScenarioError> {
    let sc = compile(doc).map_err(ScenarioError::Invalid)?;
    run_scenario(&sc).map_err(|(i, error)| {
        let q = &sc.queries[i];
        ScenarioError::Engine { query: q.text.clone(), pos: q.pos, error }
    })
}

/// Parses `text` and runs its queries.
pub fn run_text(text: &str) -> Result<Vec<QueryResult>, ScenarioError> {
    let doc = parse_syntax(text).map_err(ScenarioError::Invalid)?;
    run_queries(&doc)
}
