use std::fmt;

use serde::{Deserialize, Serialize};

use super::SoftLogicError;

/// A continuous truth value in `[0, 1]`.
///
/// Construction never clamps: an out-of-range or NaN value is an error, so a
/// badly written grounding function surfaces immediately instead of being
/// silently squashed into range.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct TruthValue(f64);

impl TruthValue {
    pub const FALSE: TruthValue = TruthValue(0.0);
    pub const TRUE: TruthValue = TruthValue(1.0);

    pub fn new(value: f64) -> Result<Self, SoftLogicError> {
        if (0.0..=1.0).contains(&value) {
            Ok(TruthValue(value))
        } else {
            Err(SoftLogicError::OutOfRange(value))
        }
    }

    /// Boolean embedding: `true` maps to 1, `false` to 0.
    pub fn from_bool(b: bool) -> Self {
        if b {
            Self::TRUE
        } else {
            Self::FALSE
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Results of the operators below are in range by construction; the only
    /// thing this guards against is a last-ulp rounding excursion.
    #[inline]
    fn from_arith(v: f64) -> Self {
        debug_assert!(v.is_finite());
        TruthValue(v.clamp(0.0, 1.0))
    }
}

impl fmt::Display for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<f64> for TruthValue {
    type Error = SoftLogicError;

    fn try_from(v: f64) -> Result<Self, Self::Error> {
        TruthValue::new(v)
    }
}

impl From<TruthValue> for f64 {
    fn from(t: TruthValue) -> f64 {
        t.0
    }
}

/// Selection-style conjunction `A & B = max{A + B - 1, 0}`.
pub fn strong_conj(a: TruthValue, b: TruthValue) -> TruthValue {
    TruthValue::from_arith((a.0 + b.0 - 1.0).max(0.0))
}

/// `A | B = min{A + B, 1}`.
pub fn disj(a: TruthValue, b: TruthValue) -> TruthValue {
    TruthValue::from_arith((a.0 + b.0).min(1.0))
}

/// Averaging conjunction `A1 ∧ ... ∧ AN = Σ Ai / N`.
pub fn avg_conj(values: &[TruthValue]) -> Result<TruthValue, SoftLogicError> {
    if values.is_empty() {
        return Err(SoftLogicError::EmptyConjunction);
    }
    let sum: f64 = values.iter().map(|v| v.0).sum();
    Ok(TruthValue::from_arith(sum / values.len() as f64))
}

/// `!A = 1 - A`.
pub fn neg(a: TruthValue) -> TruthValue {
    TruthValue::from_arith(1.0 - a.0)
}

/// Łukasiewicz implication `A => B = min{1 - A + B, 1}`, i.e. `!A | B`.
pub fn implies(a: TruthValue, b: TruthValue) -> TruthValue {
    TruthValue::from_arith((1.0 - a.0 + b.0).min(1.0))
}
