//! The teacher construction: projecting a student distribution onto the
//! rule-regularized subspace.
//!
//! For rule groundings `r_lg(Y) ∈ [0, 1]` with confidences `λ_l` and
//! regularization strength `C`, the projection of `p` is
//!
//! ```text
//! q(Y) ∝ p(Y) · exp{ −Σ_{l,g} C·λ_l·(1 − r_lg(Y)) }
//! ```
//!
//! computed entirely in log space. Hard rules (`λ = ∞`) are not folded into
//! the exponent; they zero out violating candidates exactly.

mod oracle;

pub use oracle::{
    random_problem, verification_sweep, verify_optimality, OptimalityReport, OracleSettings,
    SweepReport,
};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logspace::{argmax, log_sum_exp};
use crate::softlogic::TruthValue;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProjectionError {
    #[error("every candidate violates a hard rule; the constraint set is infeasible")]
    Infeasible,
    #[error("regularization strength C must be finite and non-negative, got {0}")]
    BadStrength(f64),
    #[error("rule confidence must be non-negative, got {0}")]
    BadConfidence(f64),
    #[error("base log-probabilities do not normalize (log-sum = {0})")]
    NotNormalized(f64),
    #[error("grounding {index} has {got} truth values for {expected} candidates")]
    Shape {
        index: usize,
        got: usize,
        expected: usize,
    },
}

/// Rule confidence `λ`: a non-negative weight, or `Hard` for `λ = ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Confidence {
    Finite(f64),
    Hard,
}

impl Confidence {
    pub fn new(lambda: f64) -> Result<Self, ProjectionError> {
        if lambda == f64::INFINITY {
            Ok(Confidence::Hard)
        } else if lambda.is_finite() && lambda >= 0.0 {
            Ok(Confidence::Finite(lambda))
        } else {
            Err(ProjectionError::BadConfidence(lambda))
        }
    }

    pub fn is_hard(self) -> bool {
        matches!(self, Confidence::Hard)
    }

    pub fn value(self) -> f64 {
        match self {
            Confidence::Finite(v) => v,
            Confidence::Hard => f64::INFINITY,
        }
    }

    /// Log-weight contribution of one grounding with truth `r`:
    /// `−C·λ·(1 − r)`, or `−∞` for a violated hard rule.
    #[inline]
    pub fn log_penalty(self, c: f64, r: f64) -> f64 {
        match self {
            Confidence::Finite(lambda) => -(c * lambda) * (1.0 - r),
            Confidence::Hard => {
                if r < 1.0 {
                    f64::NEG_INFINITY
                } else {
                    0.0
                }
            }
        }
    }
}

impl fmt::Display for Confidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Confidence::Finite(v) => write!(f, "{v}"),
            Confidence::Hard => f.write_str("inf"),
        }
    }
}

/// One rule grounding evaluated on every candidate output.
#[derive(Debug, Clone, PartialEq)]
pub struct Grounding {
    pub confidence: Confidence,
    pub truths: Vec<TruthValue>,
}

/// An explicitly enumerated projection problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionProblem {
    base_log_probs: Vec<f64>,
    groundings: Vec<Grounding>,
    c: f64,
}

impl ProjectionProblem {
    pub fn new(
        base_log_probs: Vec<f64>,
        groundings: Vec<Grounding>,
        c: f64,
    ) -> Result<Self, ProjectionError> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(ProjectionError::BadStrength(c));
        }
        let z = log_sum_exp(&base_log_probs);
        if !(z.abs() < 1e-9) {
            return Err(ProjectionError::NotNormalized(z));
        }
        for (index, g) in groundings.iter().enumerate() {
            if g.truths.len() != base_log_probs.len() {
                return Err(ProjectionError::Shape {
                    index,
                    got: g.truths.len(),
                    expected: base_log_probs.len(),
                });
            }
        }
        Ok(Self {
            base_log_probs,
            groundings,
            c,
        })
    }

    /// Convenience constructor from probabilities.
    pub fn from_probs(
        probs: &[f64],
        groundings: Vec<Grounding>,
        c: f64,
    ) -> Result<Self, ProjectionError> {
        Self::new(probs.iter().map(|p| p.ln()).collect(), groundings, c)
    }

    pub fn base_log_probs(&self) -> &[f64] {
        &self.base_log_probs
    }

    pub fn groundings(&self) -> &[Grounding] {
        &self.groundings
    }

    pub fn strength(&self) -> f64 {
        self.c
    }

    pub fn num_candidates(&self) -> usize {
        self.base_log_probs.len()
    }
}

/// The projected distribution `q` over the candidates of one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct TeacherPosterior {
    log_q: Vec<f64>,
    log_z: f64,
}

impl TeacherPosterior {
    pub fn log_probs(&self) -> &[f64] {
        &self.log_q
    }

    pub fn probs(&self) -> Vec<f64> {
        self.log_q.iter().map(|l| l.exp()).collect()
    }

    /// `log Z`, the normalizer of the unnormalized projected weights.
    pub fn log_normalizer(&self) -> f64 {
        self.log_z
    }

    pub fn argmax(&self) -> usize {
        argmax(&self.log_q)
    }
}

/// Closed-form projection.
pub fn project(problem: &ProjectionProblem) -> Result<TeacherPosterior, ProjectionError> {
    let c = problem.c;
    let mut log_w = problem.base_log_probs.clone();
    for g in &problem.groundings {
        for (w, r) in log_w.iter_mut().zip(&g.truths) {
            *w += g.confidence.log_penalty(c, r.value());
        }
    }
    let log_z = log_sum_exp(&log_w);
    if log_z == f64::NEG_INFINITY {
        return Err(ProjectionError::Infeasible);
    }
    log_w.iter_mut().for_each(|w| *w -= log_z);
    Ok(TeacherPosterior { log_q: log_w, log_z })
}
