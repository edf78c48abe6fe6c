//! Soft-logic truth values and the rule-expression language built on them.

mod expr;
mod truth;

pub use expr::{parse_rule_expr, PredicateBinding, PredicateFn, RuleExpr};
pub use truth::{avg_conj, disj, implies, neg, strong_conj, TruthValue};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SoftLogicError {
    #[error("truth value {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("averaging conjunction needs at least one operand")]
    EmptyConjunction,
    #[error("predicate `{0}` has no binding")]
    Unbound(String),
    #[error("syntax error at byte {offset}: expected one of {expected:?}, found {found}")]
    Parse {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },
}
