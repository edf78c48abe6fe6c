//! Teacher soft predictions under three regimes: per-position enumeration,
//! forward-backward over a chain, and Gibbs sampling for groups of instances
//! linked by cross-instance groundings.

mod chain;
mod gibbs;
mod groups;

pub use chain::{chain_map_decode, chain_marginals, ChainTeacherQuery};
pub use gibbs::{
    gibbs_soft_predict, GroupMember, GroupTeacherQuery, PairFactor, SamplerKind, SamplerSettings,
};
pub use groups::{form_groups, Group};

use thiserror::Error;

use crate::logspace::log_sum_exp;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("no label sequence satisfies the hard constraints")]
    Infeasible,
    #[error("position {position}: every label is masked")]
    MaskedPosition { position: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("empty sequence")]
    Empty,
}

/// Log-penalty tables for bigram groundings over `k` labels.
///
/// `transition[a * k + b]` applies when label `b` follows `a`; `start` and
/// `end` apply at the sequence boundaries. Entries are `≤ 0`, with `−∞`
/// marking forbidden pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct BigramPenalty {
    pub k: usize,
    pub transition: Vec<f64>,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
}

impl BigramPenalty {
    pub fn zeros(k: usize) -> Self {
        Self {
            k,
            transition: vec![0.0; k * k],
            start: vec![0.0; k],
            end: vec![0.0; k],
        }
    }

    #[inline]
    pub fn at(&self, prev: usize, cur: usize) -> f64 {
        self.transition[prev * self.k + cur]
    }

    /// Log-weight of a whole label sequence under the bigram tables alone.
    pub fn sequence_penalty(&self, labels: &[usize]) -> f64 {
        let Some((&first, _)) = labels.split_first() else {
            return 0.0;
        };
        let mut s = self.start[first];
        for w in labels.windows(2) {
            s += self.at(w[0], w[1]);
        }
        s + self.end[*labels.last().unwrap()]
    }
}

/// Per-position base distributions plus per-position log-penalties that
/// depend on that position's label only.
#[derive(Debug, Clone)]
pub struct FactorizedTeacherQuery {
    pub base: Vec<Vec<f64>>,
    pub log_penalties: Vec<Vec<f64>>,
}

/// Renormalizes `p · exp(penalty)` independently at every position.
pub fn soft_predict_factorized(
    query: &FactorizedTeacherQuery,
) -> Result<Vec<Vec<f64>>, InferenceError> {
    if query.base.len() != query.log_penalties.len() {
        return Err(InferenceError::Shape(format!(
            "{} base rows, {} penalty rows",
            query.base.len(),
            query.log_penalties.len()
        )));
    }
    query
        .base
        .iter()
        .zip(&query.log_penalties)
        .enumerate()
        .map(|(position, (p, pen))| {
            if p.len() != pen.len() {
                return Err(InferenceError::Shape(format!("row {position}")));
            }
            let logw: Vec<f64> = p.iter().zip(pen).map(|(pi, l)| pi.ln() + l).collect();
            let z = log_sum_exp(&logw);
            if z == f64::NEG_INFINITY {
                return Err(InferenceError::MaskedPosition { position });
            }
            Ok(logw.iter().map(|w| (w - z).exp()).collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::{project, Confidence, Grounding, ProjectionProblem};
    use crate::softlogic::TruthValue;

    #[test]
    fn zero_penalties_return_base() {
        let base = vec![vec![0.2, 0.8], vec![0.6, 0.4]];
        let q = FactorizedTeacherQuery {
            base: base.clone(),
            log_penalties: vec![vec![0.0; 2]; 2],
        };
        let out = soft_predict_factorized(&q).unwrap();
        for (a, b) in out.iter().flatten().zip(base.iter().flatten()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn single_position_matches_projection() {
        let q = FactorizedTeacherQuery {
            base: vec![vec![0.5, 0.5]],
            log_penalties: vec![vec![0.0, -6.0]],
        };
        let out = soft_predict_factorized(&q).unwrap();
        let pr = ProjectionProblem::from_probs(
            &[0.5, 0.5],
            vec![Grounding {
                confidence: Confidence::Finite(1.0),
                truths: vec![TruthValue::TRUE, TruthValue::FALSE],
            }],
            6.0,
        )
        .unwrap();
        let want = project(&pr).unwrap().probs();
        assert!((out[0][0] - want[0]).abs() < 1e-15);
        assert!((out[0][0] - 0.99753).abs() < 5e-6);
    }

    #[test]
    fn masking_renormalizes() {
        let third = 1.0 / 3.0;
        let q = FactorizedTeacherQuery {
            base: vec![vec![third; 3]],
            log_penalties: vec![vec![0.0, 0.0, f64::NEG_INFINITY]],
        };
        let out = soft_predict_factorized(&q).unwrap();
        assert!((out[0][0] - 0.5).abs() < 1e-15);
        assert!((out[0][1] - 0.5).abs() < 1e-15);
        assert_eq!(out[0][2], 0.0);

        let q = FactorizedTeacherQuery {
            base: vec![vec![0.5, 0.5]],
            log_penalties: vec![vec![f64::NEG_INFINITY; 2]],
        };
        assert_eq!(
            soft_predict_factorized(&q),
            Err(InferenceError::MaskedPosition { position: 0 })
        );
    }
}
