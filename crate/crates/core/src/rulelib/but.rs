use super::RuleError;
use crate::softlogic::{self, parse_rule_expr, PredicateBinding, RuleExpr, TruthValue};

/// Class index of the positive sentiment label; negative is `0`.
pub const POSITIVE: usize = 1;

/// The split of a sentence at its first standalone "but".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ButStructure {
    pub split: usize,
    /// Token range of clause B (everything after the "but").
    pub clause_b: std::ops::Range<usize>,
}

/// Finds the first standalone, case-folded `but` with at least one token on
/// each side.
pub fn detect_but<S: AsRef<str>>(tokens: &[S]) -> Option<ButStructure> {
    tokens
        .iter()
        .enumerate()
        .find(|(i, t)| {
            t.as_ref().eq_ignore_ascii_case("but") && *i > 0 && i + 1 < tokens.len()
        })
        .map(|(i, _)| ButStructure {
            split: i,
            clause_b: i + 1..tokens.len(),
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ButVariant {
    /// Averaging conjunction of the two implications.
    #[default]
    Avg,
    /// Selection (`&`) conjunction of the two implications.
    Strong,
}

/// Closed-form truth of the but-rule for label `positive`, given the
/// positive-class probability the student assigns to clause B alone.
pub fn but_rule_truth(
    sigma_b_pos: f64,
    positive: bool,
    variant: ButVariant,
) -> Result<TruthValue, RuleError> {
    if !(0.0..=1.0).contains(&sigma_b_pos) {
        return Err(RuleError::BadProbability(sigma_b_pos));
    }
    let v = match (variant, positive) {
        (ButVariant::Avg, true) => (1.0 + sigma_b_pos) / 2.0,
        (ButVariant::Avg, false) => (2.0 - sigma_b_pos) / 2.0,
        (ButVariant::Strong, true) => sigma_b_pos,
        (ButVariant::Strong, false) => 1.0 - sigma_b_pos,
    };
    Ok(TruthValue::new(v)?)
}

/// Grounding context for one sentence.
#[derive(Debug, Clone, Copy)]
pub struct ButContext {
    pub has_but: bool,
    pub sigma_b_pos: f64,
}

/// The but-rule as a soft-logic expression over bound predicates.
#[derive(Debug, Clone)]
pub struct ButRule {
    pub variant: ButVariant,
    expr: RuleExpr,
}

const AVG_RULE: &str = "has_but(S) => avg(is_pos(y) => b_pos(S), b_pos(S) => is_pos(y))";
const STRONG_RULE: &str = "has_but(S) => ((is_pos(y) => b_pos(S)) && (b_pos(S) => is_pos(y)))";

fn bindings() -> PredicateBinding<ButContext, usize> {
    let mut b = PredicateBinding::new();
    b.bind("has_but", |_, ctx: &ButContext, _| Ok(TruthValue::from_bool(ctx.has_but)))
        .bind("b_pos", |_, ctx: &ButContext, _| TruthValue::new(ctx.sigma_b_pos))
        .bind("is_pos", |_, _, y: &usize| Ok(TruthValue::from_bool(*y == POSITIVE)));
    b
}

impl ButRule {
    pub fn new(variant: ButVariant) -> Self {
        let text = match variant {
            ButVariant::Avg => AVG_RULE,
            ButVariant::Strong => STRONG_RULE,
        };
        let expr = parse_rule_expr(text).expect("built-in rule text parses");
        Self { variant, expr }
    }

    pub fn expr(&self) -> &RuleExpr {
        &self.expr
    }

    /// Evaluates the rule for sentence context `ctx` and candidate label `y`.
    pub fn truth(&self, ctx: ButContext, y: usize) -> Result<TruthValue, RuleError> {
        thread_local! {
            static BINDINGS: PredicateBinding<ButContext, usize> = bindings();
        }
        BINDINGS.with(|b| self.expr.evaluate(b, &ctx, &y)).map_err(|e| match e {
            softlogic::SoftLogicError::OutOfRange(v) => RuleError::BadProbability(v),
            other => RuleError::Logic(other),
        })
    }
}
