//! Concrete syntax for models, checking, elaboration to contracts and printing.

pub mod ast;
pub mod check;
pub mod elab;
pub mod inv;
pub mod lexer;
pub mod parser;
pub mod print;

use thiserror::Error;

use crate::contract::CalcError;
use crate::state::StateError;

pub use ast::{Ast, AstKind, Comm, Model, Pos, ProcessDef};
pub use check::{check_model, check_predicate};
pub use elab::{elaborate, Elaborator};
pub use inv::{loop_parts, parse_invariant_file, InvariantFile};
pub use parser::{parse_expr, parse_model, parse_predicate, parse_process};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("{line}:{col}: syntax error: expected {expected}, found {found}")]
    Syntax { line: usize, col: usize, expected: String, found: String },
    #[error("{pos}: type error: {msg}")]
    Type { pos: Pos, msg: String },
    #[error("{pos}: unknown name `{name}`")]
    UnknownName { pos: Pos, name: String },
    #[error("{pos}: `{what}` is not supported")]
    Unsupported { pos: Pos, what: String },
    #[error("{pos}: {source}")]
    Calc { pos: Pos, source: CalcError },
    #[error(transparent)]
    State(#[from] StateError),
}

/// Parses and checks a model in one step.
pub fn load_model(src: &str) -> Result<Model, DslError> {
    let m = parse_model(src)?;
    check_model(&m)?;
    Ok(m)
}
