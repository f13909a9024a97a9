//! Error type shared across the crate.

use thiserror::Error;

/// Errors raised by graph construction, parsing, queries and the oracle.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("duplicate edge {from} -> {to}")]
    DuplicateEdge { from: String, to: String },

    #[error("duplicate vertex {0}")]
    DuplicateVertex(String),

    #[error("unknown vertex {0}")]
    UnknownVertex(String),

    #[error("invalid series name {name:?}: {reason}")]
    InvalidSeriesName { name: String, reason: String },

    #[error("vertex {series}@{time} outside window [{lo}, {hi}]")]
    OutOfWindow {
        series: String,
        time: i64,
        lo: i64,
        hi: i64,
    },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("interventions, effects and conditioning set must be disjoint: {0}")]
    Overlap(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("oracle budget of {0} work units exceeded")]
    BudgetExceeded(u64),

    #[error("{x} is not an ancestor of {y}")]
    NotAncestor { x: String, y: String },

    #[error("verdict is not identifiable; no do-free formula exists")]
    NotIdentifiable,

    #[error("internal invariant violation: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
