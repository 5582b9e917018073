//! Graph pattern matching over a code property graph.
//!
//! Patterns are written with the builder vocabulary in [`pattern`] and run
//! with [`match_pattern`]. Evaluation follows a [`Budget`]: when a search
//! exceeds its time limit it is retried with smaller hop caps on
//! variable-length steps, and the outcome is flagged incomplete.

mod budget;
mod engine;
pub mod pattern;

use std::time::Instant;

pub use budget::Budget;
pub use engine::{Binding, CompiledPattern};
pub use pattern::{Chain, Cmp, Cond, Direction, NodePattern, NodePred, PathStep, Pattern, PropOp, PropTest};

use crate::cpg::CpgGraph;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QueryError {
    #[error("search exceeded {limit_secs} s at every hop cap")]
    BudgetExhausted { limit_secs: f64 },
    #[error("variable `{0}` is not bound in this scope")]
    UnknownVariable(String),
    #[error("malformed pattern: {0}")]
    Malformed(String),
}

/// Distinct projections onto the returned variables, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchOutcome {
    pub bindings: Vec<Binding>,
    /// False when a reduced hop cap produced the result.
    pub complete: bool,
    /// Cap in effect for the attempt that finished.
    pub hop_cap: Option<u32>,
}

pub fn match_pattern(g: &CpgGraph, p: &Pattern, budget: &Budget) -> Result<MatchOutcome, QueryError> {
    let cp = CompiledPattern::new(p)?;
    match_compiled(g, &cp, budget)
}

pub fn match_compiled(g: &CpgGraph, cp: &CompiledPattern, budget: &Budget) -> Result<MatchOutcome, QueryError> {
    for (i, cap) in budget.attempts().into_iter().enumerate() {
        let deadline = Instant::now().checked_add(budget.time_limit);
        let a = engine::search(g, cp, &[], cap, deadline, false);
        if !a.timed_out {
            return Ok(MatchOutcome {
                bindings: a.bindings,
                complete: i == 0,
                hop_cap: cap,
            });
        }
    }
    Err(QueryError::BudgetExhausted {
        limit_secs: budget.time_limit.as_secs_f64(),
    })
}

/// Whether `sub` has a match extending `binding`.
pub fn exists_under(g: &CpgGraph, binding: &Binding, sub: &Pattern, budget: &Budget) -> Result<bool, QueryError> {
    let (cp, preset) = CompiledPattern::for_binding(sub, binding)?;
    for cap in budget.attempts() {
        let deadline = Instant::now().checked_add(budget.time_limit);
        let a = engine::search(g, &cp, &preset, cap, deadline, true);
        if !a.timed_out {
            return Ok(!a.bindings.is_empty());
        }
    }
    Err(QueryError::BudgetExhausted {
        limit_secs: budget.time_limit.as_secs_f64(),
    })
}
