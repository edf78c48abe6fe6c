//! Student networks: a convolutional text classifier and a window-based
//! sequence tagger, both trained against mixed hard/soft targets.
//!
//! All arithmetic is `f64` and backpropagation is written out by hand so the
//! gradients can be checked against finite differences.

mod checkpoint;
mod classifier;
mod loss;
mod optim;
mod params;
mod tagger;
mod vocab;

pub use checkpoint::{Checkpoint, ModelKind, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use classifier::{ClassifierConfig, TextClassifier};
pub use loss::{mixed_loss, mixed_loss_grad, LossValue, MixedTarget, LOG_FLOOR};
pub use optim::Adadelta;
pub use params::{ParamBlock, ParamSet};
pub use tagger::{SequenceTagger, TaggerConfig};
pub use vocab::{Vocabulary, PAD, UNK};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PredictorError {
    #[error("empty input")]
    EmptyInput,
    #[error("token index {index} outside vocabulary of size {size}")]
    TokenOutOfRange { index: usize, size: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("imitation weight {0} is outside [0, 1]")]
    BadImitation(f64),
    #[error("soft target is not a distribution: {0}")]
    BadSoftTarget(String),
    #[error("non-finite gradient in parameter block `{0}`")]
    NonFiniteGradient(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

/// A differentiable model producing one distribution per output row: a
/// single row for a classifier, one row per token for a tagger.
pub trait Predictor {
    fn params(&self) -> &ParamSet;
    fn params_mut(&mut self) -> &mut ParamSet;
    fn num_labels(&self) -> usize;

    /// Unnormalized scores, one row per output.
    fn logits(&self, tokens: &[usize]) -> Result<Vec<Vec<f64>>, PredictorError>;

    /// Adds `∂L/∂θ` to `grads` given `∂L/∂logits` for every output row.
    fn backward(
        &self,
        tokens: &[usize],
        dlogits: &[Vec<f64>],
        grads: &mut ParamSet,
    ) -> Result<(), PredictorError>;

    /// Softmax of [`Predictor::logits`].
    fn forward(&self, tokens: &[usize]) -> Result<Vec<Vec<f64>>, PredictorError> {
        Ok(self
            .logits(tokens)?
            .iter()
            .map(|z| crate::logspace::softmax(z))
            .collect())
    }

    /// Mixed loss summed over rows, accumulating its gradient into `grads`.
    fn accumulate(
        &self,
        tokens: &[usize],
        targets: &[MixedTarget],
        grads: &mut ParamSet,
    ) -> Result<LossValue, PredictorError> {
        let probs = self.forward(tokens)?;
        if probs.len() != targets.len() {
            return Err(PredictorError::Dimension(format!(
                "{} outputs, {} targets",
                probs.len(),
                targets.len()
            )));
        }
        let mut total = LossValue::default();
        let mut dlogits = Vec::with_capacity(probs.len());
        for (p, t) in probs.iter().zip(targets) {
            total += mixed_loss(p, t)?;
            dlogits.push(mixed_loss_grad(p, t)?);
        }
        self.backward(tokens, &dlogits, grads)?;
        Ok(total)
    }
}

/// Drops trailing padding and validates token indices.
pub(crate) fn trim_input(tokens: &[usize], vocab_size: usize) -> Result<&[usize], PredictorError> {
    let end = tokens.iter().rposition(|&t| t != PAD).map_or(0, |i| i + 1);
    let tokens = &tokens[..end];
    if tokens.is_empty() {
        return Err(PredictorError::EmptyInput);
    }
    if let Some(&index) = tokens.iter().find(|&&t| t >= vocab_size) {
        return Err(PredictorError::TokenOutOfRange {
            index,
            size: vocab_size,
        });
    }
    Ok(tokens)
}

/// One optimizer step on the mean mixed loss over `batch`. Returns the mean
/// per-instance loss.
pub fn backward_and_step<P: Predictor>(
    model: &mut P,
    batch: &[(&[usize], &[MixedTarget])],
    optimizer: &mut Adadelta,
) -> Result<LossValue, PredictorError> {
    backward_and_step_sum(model, &[batch], optimizer)
}

/// One optimizer step on the sum, over `parts`, of each part's mean mixed
/// loss. Empty parts contribute nothing. Returns that sum.
pub fn backward_and_step_sum<P: Predictor>(
    model: &mut P,
    parts: &[&[(&[usize], &[MixedTarget])]],
    optimizer: &mut Adadelta,
) -> Result<LossValue, PredictorError> {
    let mut grads = model.params().zeros_like();
    let mut total = LossValue::default();
    let mut any = false;
    for part in parts.iter().filter(|p| !p.is_empty()) {
        let mut g = model.params().zeros_like();
        let mut loss = LossValue::default();
        for (tokens, targets) in part.iter() {
            loss += model.accumulate(tokens, targets, &mut g)?;
        }
        let scale = 1.0 / part.len() as f64;
        g.scale(scale);
        if any {
            for (a, b) in grads.blocks.iter_mut().zip(&g.blocks) {
                a.data.iter_mut().zip(&b.data).for_each(|(x, y)| *x += y);
            }
        } else {
            grads = g;
            any = true;
        }
        loss.value *= scale;
        total += loss;
    }
    if !any {
        return Ok(total);
    }
    if let Some(block) = grads.blocks.iter().find(|b| b.data.iter().any(|g| !g.is_finite())) {
        return Err(PredictorError::NonFiniteGradient(block.name.clone()));
    }
    optimizer.step(model.params_mut(), &grads);
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central-difference gradient check of the summed mixed loss, with the
    /// error measured per parameter block as ‖a − n‖ / max(‖a‖ + ‖n‖, 1e-12).
    fn grad_check<P: Predictor>(model: &mut P, tokens: &[usize], targets: &[MixedTarget]) {
        let mut analytic = model.params().zeros_like();
        model.accumulate(tokens, targets, &mut analytic).unwrap();
        let eps = 1e-4;
        for b in 0..model.params().blocks.len() {
            let n = model.params().blocks[b].data.len();
            let mut diff2 = 0.0;
            let mut norm_a = 0.0;
            let mut norm_n = 0.0;
            for i in 0..n {
                let orig = model.params().blocks[b].data[i];
                let loss_at = |m: &mut P, v: f64| {
                    m.params_mut().blocks[b].data[i] = v;
                    let mut g = m.params().zeros_like();
                    m.accumulate(tokens, targets, &mut g).unwrap().value
                };
                let plus = loss_at(model, orig + eps);
                let minus = loss_at(model, orig - eps);
                model.params_mut().blocks[b].data[i] = orig;
                let num = (plus - minus) / (2.0 * eps);
                let a = analytic.blocks[b].data[i];
                diff2 += (a - num).powi(2);
                norm_a += a * a;
                norm_n += num * num;
            }
            let rel = diff2.sqrt() / (norm_a.sqrt() + norm_n.sqrt()).max(1e-12);
            assert!(rel < 1e-4, "block {}: rel err {rel}", model.params().blocks[b].name);
        }
    }

    fn targets(rows: usize, k: usize, pi: f64) -> Vec<MixedTarget> {
        (0..rows)
            .map(|r| {
                let mut soft: Vec<f64> = (0..k).map(|j| 1.0 + ((r + 2 * j) % 3) as f64).collect();
                let s: f64 = soft.iter().sum();
                soft.iter_mut().for_each(|x| *x /= s);
                MixedTarget::labeled(r % k, soft, pi).unwrap()
            })
            .collect()
    }

    #[test]
    fn classifier_gradients_match_finite_differences() {
        for pi in [0.0, 0.5, 1.0] {
            let mut m = TextClassifier::new(
                ClassifierConfig {
                    vocab_size: 7,
                    dim: 4,
                    widths: vec![2, 3],
                    maps: 3,
                    num_labels: 3,
                },
                3,
            );
            grad_check(&mut m, &[2, 5, 3, 6, 2], &targets(1, 3, pi));
            // Shorter than the widest filter: exercises zero padding.
            grad_check(&mut m, &[4, 2], &targets(1, 3, pi));
        }
    }

    #[test]
    fn tagger_gradients_match_finite_differences() {
        for pi in [0.0, 0.5, 1.0] {
            let mut m = SequenceTagger::new(
                TaggerConfig {
                    vocab_size: 6,
                    dim: 3,
                    radius: 1,
                    hidden: 4,
                    num_labels: 5,
                },
                8,
            );
            grad_check(&mut m, &[2, 3, 4, 5], &targets(4, 5, pi));
        }
    }

    #[test]
    fn loss_decreases_on_separable_data() {
        let mut m = TextClassifier::new(
            ClassifierConfig {
                vocab_size: 6,
                dim: 8,
                widths: vec![2],
                maps: 4,
                num_labels: 2,
            },
            1,
        );
        let data: Vec<(Vec<usize>, Vec<MixedTarget>)> = vec![
            (vec![2, 2, 4], vec![MixedTarget::hard(0, 2)]),
            (vec![4, 2, 2], vec![MixedTarget::hard(0, 2)]),
            (vec![3, 3, 5], vec![MixedTarget::hard(1, 2)]),
            (vec![5, 3, 3], vec![MixedTarget::hard(1, 2)]),
        ];
        let batch: Vec<(&[usize], &[MixedTarget])> =
            data.iter().map(|(x, t)| (x.as_slice(), t.as_slice())).collect();
        let mut opt = Adadelta::default();
        let first = backward_and_step(&mut m, &batch, &mut opt).unwrap().value;
        let mut last = first;
        for _ in 0..49 {
            last = backward_and_step(&mut m, &batch, &mut opt).unwrap().value;
        }
        assert!(last < first, "{last} >= {first}");
    }

    #[test]
    fn identical_steps_give_identical_parameters() {
        let make = || {
            SequenceTagger::new(
                TaggerConfig {
                    vocab_size: 6,
                    dim: 3,
                    radius: 2,
                    hidden: 4,
                    num_labels: 3,
                },
                5,
            )
        };
        let (mut a, mut b) = (make(), make());
        let x = [2usize, 3, 4];
        let t = targets(3, 3, 0.3);
        let batch = [(&x[..], &t[..])];
        let (mut oa, mut ob) = (Adadelta::default(), Adadelta::default());
        for _ in 0..3 {
            backward_and_step(&mut a, &batch, &mut oa).unwrap();
            backward_and_step(&mut b, &batch, &mut ob).unwrap();
        }
        assert_eq!(a.params(), b.params());
    }

    #[test]
    fn hard_only_step_matches_manual_gradient() {
        let mut m = TextClassifier::new(ClassifierConfig::small(6, 2), 2);
        let x = [2usize, 3, 4];
        let t = [MixedTarget::labeled(1, vec![0.5, 0.5], 0.0).unwrap()];
        let mut g = m.params().zeros_like();
        let p = m.forward(&x).unwrap();
        m.backward(&x, &[vec![p[0][0], p[0][1] - 1.0]], &mut g).unwrap();
        let mut opt_a = Adadelta::default();
        let mut expected = m.params().clone();
        opt_a.step(&mut expected, &g);
        backward_and_step(&mut m, &[(&x[..], &t[..])], &mut Adadelta::default()).unwrap();
        assert_eq!(m.params(), &expected);
    }

    #[test]
    fn non_finite_gradient_names_the_block() {
        let mut m = TextClassifier::new(ClassifierConfig::small(5, 2), 0);
        let last = m.params().blocks.len() - 2;
        m.params_mut().blocks[last].data[0] = f64::NAN;
        let x = [2usize, 3];
        let t = [MixedTarget::hard(0, 2)];
        let err = backward_and_step(&mut m, &[(&x[..], &t[..])], &mut Adadelta::default());
        assert!(matches!(err, Err(PredictorError::NonFiniteGradient(ref b)) if b == "embedding"));
    }

    #[test]
    fn empty_extra_part_changes_nothing() {
        let make = || TextClassifier::new(ClassifierConfig::small(6, 2), 4);
        let (mut a, mut b) = (make(), make());
        let x = [2usize, 3, 4];
        let t = [MixedTarget::hard(1, 2)];
        let batch = [(&x[..], &t[..])];
        let la = backward_and_step(&mut a, &batch, &mut Adadelta::default()).unwrap();
        let lb = backward_and_step_sum(&mut b, &[&batch, &[]], &mut Adadelta::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(la, lb);
    }

    #[test]
    fn parts_are_averaged_separately() {
        // One item in part 1 and two copies of another in part 2: the step
        // equals a single batch holding each once.
        let make = || TextClassifier::new(ClassifierConfig::small(6, 2), 4);
        let (mut a, mut b) = (make(), make());
        let (x, y) = ([2usize, 3], [4usize, 5]);
        let t = [MixedTarget::hard(1, 2)];
        let u = [MixedTarget::hard(0, 2)];
        let mut ga = a.params().zeros_like();
        a.accumulate(&x, &t, &mut ga).unwrap();
        a.accumulate(&y, &u, &mut ga).unwrap();
        let mut opt = Adadelta::default();
        opt.step(a.params_mut(), &ga);
        backward_and_step_sum(
            &mut b,
            &[&[(&x[..], &t[..])], &[(&y[..], &u[..]), (&y[..], &u[..])]],
            &mut Adadelta::default(),
        )
        .unwrap();
        for (pa, pb) in a.params().blocks.iter().zip(&b.params().blocks) {
            for (u, v) in pa.data.iter().zip(&pb.data) {
                assert!((u - v).abs() < 1e-15);
            }
        }
    }
}
