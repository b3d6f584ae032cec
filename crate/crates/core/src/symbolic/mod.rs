//! Symbolic WCET formulas: construction from trees, simplification by
//! rewriting, and evaluation under bindings.

mod build;
mod eval;
mod formula;
mod rewrite;
mod text;

pub use build::gamma_symbolic;
pub use eval::{evaluate, substitute, Bindings, Value};
pub use formula::{Count, Formula, Header, Identifiers};
pub use rewrite::{
    always_flat, always_zero, apply_rule, default_fuel, redexes, rewrite_at, root_rules, simplify,
    simplify_with_fuel, static_loop, Rule, Simplifier, DEFAULT_FUEL,
};
pub use text::parse_formula;

use thiserror::Error;

use crate::awcet::AwcetError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymbolicError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("`{name}` must be bound to {expected}, got `{found}`")]
    TypeMismatch {
        name: String,
        expected: String,
        found: String,
    },
    #[error("unbound identifiers: {}", .0.join(", "))]
    UnboundIdentifier(Vec<String>),
    #[error("simplification did not terminate within {0} rule applications")]
    FuelExhausted(usize),
    #[error(transparent)]
    Awcet(#[from] AwcetError),
}
