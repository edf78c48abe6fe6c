//! Concrete rule templates: the contrastive "A but B" sentiment rule, BIOES
//! transition constraints, and the list-counterpart consistency rule.

mod but;
mod list;
mod spec;
mod tags;

pub use but::{but_rule_truth, detect_but, ButContext, ButRule, ButStructure, ButVariant, POSITIVE};
pub use list::{list_rule_truth, CategoryCollapse, CounterpartMode, ListRule};
pub use spec::{parse_rule_specs, RuleSpec};
pub use tags::{Prefix, Tag, TagSet};

use thiserror::Error;

use crate::inference::BigramPenalty;
use crate::projection::Confidence;
use crate::softlogic::{SoftLogicError, TruthValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleError {
    #[error("probability {0} is outside [0, 1]")]
    BadProbability(f64),
    #[error("distribution has {got} entries, expected {expected}")]
    Dimension { got: usize, expected: usize },
    #[error("unknown tag `{0}`")]
    BadTag(String),
    #[error("bad category name `{0}`")]
    BadTagSet(String),
    #[error("rule spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Logic(#[from] SoftLogicError),
}

/// What a rule's groundings range over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleScope {
    PerInstance,
    Bigram,
    CrossInstance,
}

#[derive(Debug, Clone)]
pub enum RuleKind {
    But(ButRule),
    /// `equal(y[i-1], prev) => !equal(y[i], cur)`; `None` is a sequence boundary.
    ForbiddenBigram { prev: Option<usize>, cur: Option<usize> },
    ListCounterpart(ListRule),
}

/// A named rule with its confidence.
#[derive(Debug, Clone)]
pub struct Rule {
    pub name: String,
    pub confidence: Confidence,
    pub scope: RuleScope,
    pub kind: RuleKind,
}

impl Rule {
    pub fn but(lambda: f64, variant: ButVariant) -> Result<Self, RuleError> {
        let confidence = confidence(lambda)?;
        Ok(Rule {
            name: "but".into(),
            confidence,
            scope: RuleScope::PerInstance,
            kind: RuleKind::But(ButRule::new(variant)),
        })
    }

    pub fn list_counterpart(lambda: f64, rule: ListRule) -> Result<Self, RuleError> {
        Ok(Rule {
            name: "list_counterpart".into(),
            confidence: confidence(lambda)?,
            scope: RuleScope::CrossInstance,
            kind: RuleKind::ListCounterpart(rule),
        })
    }

    /// Truth of a bigram grounding for the adjacent pair `(prev, cur)`.
    /// Rules other than forbidden bigrams are vacuously true here.
    pub fn bigram_truth(&self, prev: Option<usize>, cur: Option<usize>) -> TruthValue {
        match self.kind {
            RuleKind::ForbiddenBigram { prev: p, cur: c } => {
                TruthValue::from_bool(!(p == prev && c == cur))
            }
            _ => TruthValue::TRUE,
        }
    }
}

fn confidence(lambda: f64) -> Result<Confidence, RuleError> {
    Confidence::new(lambda).map_err(|e| RuleError::Spec(e.to_string()))
}

/// One hard rule per invalid BIOES bigram, including the boundary pairs
/// (start → I/E and B/I → end).
pub fn transition_rules(tags: &TagSet) -> Vec<Rule> {
    let k = tags.len();
    let slots: Vec<Option<usize>> = std::iter::once(None).chain((0..k).map(Some)).collect();
    let mut rules = Vec::new();
    for &prev in &slots {
        for &cur in &slots {
            if (prev.is_none() && cur.is_none()) || tags.allowed(prev, cur) {
                continue;
            }
            let name = |s: Option<usize>, edge: &str| s.map_or(edge.to_string(), |i| tags.name(i));
            rules.push(Rule {
                name: format!("transition({}, {})", name(prev, "<s>"), name(cur, "</s>")),
                confidence: Confidence::Hard,
                scope: RuleScope::Bigram,
                kind: RuleKind::ForbiddenBigram { prev, cur },
            });
        }
    }
    rules
}

/// Compiles every bigram rule in `rules` into log-penalty tables for chain
/// inference over `k` labels: `−C·λ·(1 − r)` per grounding, `−∞` for hard
/// violations.
pub fn bigram_penalty(rules: &[Rule], k: usize, c: f64) -> BigramPenalty {
    let mut pen = BigramPenalty::zeros(k);
    for rule in rules {
        if let RuleKind::ForbiddenBigram { prev, cur } = rule.kind {
            let lp = rule.confidence.log_penalty(c, rule.bigram_truth(prev, cur).value());
            match (prev, cur) {
                (Some(a), Some(b)) => pen.transition[a * k + b] += lp,
                (None, Some(b)) => pen.start[b] += lp,
                (Some(a), None) => pen.end[a] += lp,
                (None, None) => {}
            }
        }
    }
    pen
}
