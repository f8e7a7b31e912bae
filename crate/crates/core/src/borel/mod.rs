//! Borel codes as labeled trees, ordinal ranks, evaluation maps and
//! formula encodings.

mod code;
mod eval;
mod formula;
mod ordinal;

use thiserror::Error;

pub use code::{Address, BorelCode, Children, Node, NodeKind};
pub use eval::{evaluate, evaluate_shared, EvalMap, SharedEval};
pub use formula::{encode_formulas, eval_formula, FormulaCode, FormulaEval};
pub use ordinal::Ordinal;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BorelError {
    #[error("malformed ordinal notation {0:?}")]
    BadOrdinal(String),
    #[error("malformed address {0:?}")]
    BadAddress(String),
    #[error("node {0} has no rank annotation")]
    MissingRank(Address),
    #[error("no node at address {0}")]
    NoSuchAddress(Address),
    #[error("index map misses address {0}")]
    NotSurjective(Address),
    #[error("code contains complement nodes; normalize first")]
    NotComplementFree,
    #[error("evaluation clause violated")]
    ClauseViolation,
}
