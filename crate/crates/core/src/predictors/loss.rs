use std::ops::AddAssign;

use super::PredictorError;

/// Floor applied to probabilities inside logarithms.
pub const LOG_FLOOR: f64 = 1e-12;

/// Target for one output row: an optional gold label, the teacher's soft
/// prediction, and the imitation weight π. Unlabeled rows carry only the
/// imitation term.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedTarget {
    pub hard: Option<usize>,
    pub soft: Vec<f64>,
    pub pi: f64,
}

fn check_pi(pi: f64) -> Result<(), PredictorError> {
    if (0.0..=1.0).contains(&pi) {
        Ok(())
    } else {
        Err(PredictorError::BadImitation(pi))
    }
}

fn check_soft(soft: &[f64]) -> Result<(), PredictorError> {
    let sum: f64 = soft.iter().sum();
    if soft.iter().any(|&x| !(0.0..=1.0 + 1e-9).contains(&x)) || (sum - 1.0).abs() > 1e-6 {
        return Err(PredictorError::BadSoftTarget(format!("{soft:?}")));
    }
    Ok(())
}

impl MixedTarget {
    pub fn labeled(y: usize, soft: Vec<f64>, pi: f64) -> Result<Self, PredictorError> {
        check_pi(pi)?;
        check_soft(&soft)?;
        if y >= soft.len() {
            return Err(PredictorError::Dimension(format!(
                "label {y} with {} classes",
                soft.len()
            )));
        }
        Ok(Self {
            hard: Some(y),
            soft,
            pi,
        })
    }

    pub fn unlabeled(soft: Vec<f64>, pi: f64) -> Result<Self, PredictorError> {
        check_pi(pi)?;
        check_soft(&soft)?;
        Ok(Self {
            hard: None,
            soft,
            pi,
        })
    }

    /// Plain supervised target (π = 0).
    pub fn hard(y: usize, k: usize) -> Self {
        let mut soft = vec![0.0; k];
        soft[y] = 1.0;
        Self {
            hard: Some(y),
            soft,
            pi: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossValue {
    pub value: f64,
    /// Number of log terms whose argument hit [`LOG_FLOOR`].
    pub floored: usize,
}

impl AddAssign for LossValue {
    fn add_assign(&mut self, rhs: Self) {
        self.value += rhs.value;
        self.floored += rhs.floored;
    }
}

/// `(1 − π)·CE(y, p) + π·CE(s, p)`, dropping the first term when there is
/// no gold label.
pub fn mixed_loss(pred: &[f64], target: &MixedTarget) -> Result<LossValue, PredictorError> {
    if pred.len() != target.soft.len() {
        return Err(PredictorError::Dimension(format!(
            "prediction has {} classes, target {}",
            pred.len(),
            target.soft.len()
        )));
    }
    let mut floored = 0;
    let mut log_p = |k: usize| {
        let p = pred[k];
        if p < LOG_FLOOR {
            floored += 1;
            LOG_FLOOR.ln()
        } else {
            p.ln()
        }
    };
    let mut value = 0.0;
    if let Some(y) = target.hard {
        if target.pi < 1.0 {
            value -= (1.0 - target.pi) * log_p(y);
        }
    }
    if target.pi > 0.0 {
        for (k, &s) in target.soft.iter().enumerate() {
            if s > 0.0 {
                value -= target.pi * s * log_p(k);
            }
        }
    }
    Ok(LossValue { value, floored })
}

/// Gradient of [`mixed_loss`] with respect to the logits behind `pred`:
/// `p − ((1 − π)·y + π·s)` with a gold label, `π·(p − s)` without.
pub fn mixed_loss_grad(pred: &[f64], target: &MixedTarget) -> Result<Vec<f64>, PredictorError> {
    if pred.len() != target.soft.len() {
        return Err(PredictorError::Dimension(format!(
            "prediction has {} classes, target {}",
            pred.len(),
            target.soft.len()
        )));
    }
    let pi = target.pi;
    Ok(match target.hard {
        Some(y) => pred
            .iter()
            .zip(&target.soft)
            .enumerate()
            .map(|(k, (p, s))| p - (1.0 - pi) * f64::from(u8::from(k == y)) - pi * s)
            .collect(),
        None => pred.iter().zip(&target.soft).map(|(p, s)| pi * (p - s)).collect(),
    })
}
