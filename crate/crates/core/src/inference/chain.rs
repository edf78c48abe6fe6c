//! Exact inference for a label chain with bigram penalties.

use rand::Rng;

use super::{BigramPenalty, InferenceError};
use crate::logspace::log_sum_exp;

/// `q(y) ∝ Π_t p_t(y_t) · exp(unary_t(y_t)) · exp(bigram penalties)`.
#[derive(Debug, Clone)]
pub struct ChainTeacherQuery {
    /// `T × K` log-scores per position: base log-probabilities plus any
    /// unary log-penalties.
    scores: Vec<Vec<f64>>,
    bigram: BigramPenalty,
    log_z: f64,
}

impl ChainTeacherQuery {
    /// Builds a query; fails when no label sequence has non-zero weight.
    pub fn new(base_log_probs: Vec<Vec<f64>>, bigram: BigramPenalty) -> Result<Self, InferenceError> {
        Self::with_unary(base_log_probs, None, bigram)
    }

    pub fn with_unary(
        base_log_probs: Vec<Vec<f64>>,
        unary: Option<&[Vec<f64>]>,
        bigram: BigramPenalty,
    ) -> Result<Self, InferenceError> {
        if base_log_probs.is_empty() {
            return Err(InferenceError::Empty);
        }
        let k = bigram.k;
        let mut scores = base_log_probs;
        for (t, row) in scores.iter_mut().enumerate() {
            if row.len() != k {
                return Err(InferenceError::Shape(format!(
                    "position {t} has {} labels, bigram tables have {k}",
                    row.len()
                )));
            }
            if let Some(u) = unary {
                let urow = u
                    .get(t)
                    .filter(|r| r.len() == k)
                    .ok_or_else(|| InferenceError::Shape(format!("unary row {t}")))?;
                row.iter_mut().zip(urow).for_each(|(s, x)| *s += x);
            }
        }
        if let Some(u) = unary {
            if u.len() != scores.len() {
                return Err(InferenceError::Shape("unary length".into()));
            }
        }
        let mut q = Self {
            scores,
            bigram,
            log_z: 0.0,
        };
        let alpha = q.forward();
        let last = alpha.last().unwrap();
        let ends: Vec<f64> = (0..k).map(|y| last[y] + q.bigram.end[y]).collect();
        q.log_z = log_sum_exp(&ends);
        if q.log_z == f64::NEG_INFINITY {
            return Err(InferenceError::Infeasible);
        }
        Ok(q)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn num_labels(&self) -> usize {
        self.bigram.k
    }

    pub fn log_normalizer(&self) -> f64 {
        self.log_z
    }

    /// Unnormalized log-weight of a complete label sequence.
    pub fn log_weight(&self, labels: &[usize]) -> f64 {
        assert_eq!(labels.len(), self.len());
        let unary: f64 = labels.iter().enumerate().map(|(t, &y)| self.scores[t][y]).sum();
        unary + self.bigram.sequence_penalty(labels)
    }

    fn forward(&self) -> Vec<Vec<f64>> {
        let k = self.bigram.k;
        let mut alpha = Vec::with_capacity(self.len());
        alpha.push(
            (0..k)
                .map(|y| self.bigram.start[y] + self.scores[0][y])
                .collect::<Vec<_>>(),
        );
        let mut buf = vec![0.0; k];
        for t in 1..self.len() {
            let prev: &Vec<f64> = &alpha[t - 1];
            let row: Vec<f64> = (0..k)
                .map(|y| {
                    for (yp, b) in buf.iter_mut().enumerate() {
                        *b = prev[yp] + self.bigram.at(yp, y);
                    }
                    log_sum_exp(&buf) + self.scores[t][y]
                })
                .collect();
            alpha.push(row);
        }
        alpha
    }

    fn backward(&self) -> Vec<Vec<f64>> {
        let k = self.bigram.k;
        let n = self.len();
        let mut beta = vec![vec![0.0; k]; n];
        beta[n - 1] = self.bigram.end.clone();
        let mut buf = vec![0.0; k];
        for t in (0..n - 1).rev() {
            for y in 0..k {
                for (yn, b) in buf.iter_mut().enumerate() {
                    *b = self.bigram.at(y, yn) + self.scores[t + 1][yn] + beta[t + 1][yn];
                }
                beta[t][y] = log_sum_exp(&buf);
            }
        }
        beta
    }

    /// Draws one sequence from `q` by forward filtering, backward sampling.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<usize> {
        let k = self.bigram.k;
        let alpha = self.forward();
        let n = self.len();
        let mut out = vec![0; n];
        let mut logw: Vec<f64> = (0..k).map(|y| alpha[n - 1][y] + self.bigram.end[y]).collect();
        out[n - 1] = sample_log(&logw, rng);
        for t in (0..n - 1).rev() {
            for y in 0..k {
                logw[y] = alpha[t][y] + self.bigram.at(y, out[t + 1]);
            }
            out[t] = sample_log(&logw, rng);
        }
        out
    }
}

/// Samples an index with probability proportional to `exp(logw)`.
pub(crate) fn sample_log<R: Rng>(logw: &[f64], rng: &mut R) -> usize {
    let z = log_sum_exp(logw);
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_live = 0;
    for (i, &w) in logw.iter().enumerate() {
        if w == f64::NEG_INFINITY {
            continue;
        }
        last_live = i;
        acc += (w - z).exp();
        if u < acc {
            return i;
        }
    }
    last_live
}

/// Exact per-position marginals of `q` via forward-backward in log space.
pub fn chain_marginals(q: &ChainTeacherQuery) -> Vec<Vec<f64>> {
    let alpha = q.forward();
    let beta = q.backward();
    alpha
        .iter()
        .zip(&beta)
        .map(|(a, b)| {
            let mut row: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x + y - q.log_z).exp()).collect();
            // renormalize away accumulated rounding
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= s);
            row
        })
        .collect()
}

/// Highest-weight label sequence (max-product). Ties go to the lower label
/// index at every step.
pub fn chain_map_decode(q: &ChainTeacherQuery) -> Vec<usize> {
    let k = q.bigram.k;
    let n = q.len();
    let mut delta: Vec<f64> = (0..k).map(|y| q.bigram.start[y] + q.scores[0][y]).collect();
    let mut back = vec![vec![0usize; k]; n];
    for t in 1..n {
        let mut next = vec![f64::NEG_INFINITY; k];
        for y in 0..k {
            let mut best = 0;
            let mut best_v = f64::NEG_INFINITY;
            for (yp, &d) in delta.iter().enumerate() {
                let v = d + q.bigram.at(yp, y);
                if v > best_v {
                    best_v = v;
                    best = yp;
                }
            }
            back[t][y] = best;
            next[y] = best_v + q.scores[t][y];
        }
        delta = next;
    }
    let mut last = 0;
    let mut best_v = f64::NEG_INFINITY;
    for y in 0..k {
        let v = delta[y] + q.bigram.end[y];
        if v > best_v {
            best_v = v;
            last = y;
        }
    }
    let mut out = vec![0; n];
    out[n - 1] = last;
    for t in (1..n).rev() {
        out[t - 1] = back[t][out[t]];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ln(rows: &[&[f64]]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| r.iter().map(|x| x.ln()).collect()).collect()
    }

    fn forbid_0_to_1() -> BigramPenalty {
        let mut pen = BigramPenalty::zeros(2);
        pen.transition[1] = f64::NEG_INFINITY;
        pen
    }

    /// Brute-force marginals by enumerating all K^T sequences.
    fn brute(q: &ChainTeacherQuery) -> (Vec<Vec<f64>>, Vec<usize>) {
        let (n, k) = (q.len(), q.num_labels());
        let mut marg = vec![vec![0.0; k]; n];
        let mut seq = vec![0; n];
        let mut weights = Vec::new();
        loop {
            weights.push((seq.clone(), q.log_weight(&seq)));
            let mut i = 0;
            while i < n {
                seq[i] += 1;
                if seq[i] < k {
                    break;
                }
                seq[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
        let z = log_sum_exp(&weights.iter().map(|w| w.1).collect::<Vec<_>>());
        let mut best = (vec![], f64::NEG_INFINITY);
        for (s, w) in &weights {
            for (t, &y) in s.iter().enumerate() {
                marg[t][y] += (w - z).exp();
            }
            if *w > best.1 {
                best = (s.clone(), *w);
            }
        }
        (marg, best.0)
    }

    #[test]
    fn forbidden_transition_example() {
        let q = ChainTeacherQuery::new(ln(&[&[0.5, 0.5], &[0.5, 0.5]]), forbid_0_to_1()).unwrap();
        let m = chain_marginals(&q);
        assert!((m[0][0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((m[0][1] - 2.0 / 3.0).abs() < 1e-12);
        assert!((m[1][0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((m[1][1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn map_picks_best_valid_path() {
        // Unconstrained argmax would be (0, 1), which is forbidden.
        // Valid paths: (0,0)=0.24, (1,0)=0.16, (1,1)=0.24 -> tie, lower index wins.
        let q = ChainTeacherQuery::new(ln(&[&[0.6, 0.4], &[0.4, 0.6]]), forbid_0_to_1()).unwrap();
        assert_eq!(chain_map_decode(&q), vec![0, 0]);
        let (_, best) = brute(&q);
        assert_eq!(best, vec![0, 0]);
    }

    #[test]
    fn no_penalties_reduce_to_base() {
        let base = ln(&[&[0.1, 0.7, 0.2], &[0.5, 0.25, 0.25]]);
        let q = ChainTeacherQuery::new(base.clone(), BigramPenalty::zeros(3)).unwrap();
        let m = chain_marginals(&q);
        for (row, b) in m.iter().zip(&base) {
            for (x, y) in row.iter().zip(b) {
                assert!((x - y.exp()).abs() < 1e-12);
            }
        }
        assert_eq!(chain_map_decode(&q), vec![1, 0]);
    }

    #[test]
    fn concentrated_base_decodes_its_path() {
        let q = ChainTeacherQuery::new(
            ln(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 1.0]]),
            BigramPenalty::zeros(2),
        )
        .unwrap();
        assert_eq!(chain_map_decode(&q), vec![0, 1, 1]);
    }

    #[test]
    fn infeasible_chain_is_rejected() {
        let mut pen = BigramPenalty::zeros(2);
        pen.transition = vec![f64::NEG_INFINITY; 4];
        assert_eq!(
            ChainTeacherQuery::new(ln(&[&[0.5, 0.5], &[0.5, 0.5]]), pen).unwrap_err(),
            InferenceError::Infeasible
        );
        assert_eq!(
            ChainTeacherQuery::new(vec![], BigramPenalty::zeros(2)).unwrap_err(),
            InferenceError::Empty
        );
    }

    #[test]
    fn random_instances_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(1..=5);
            let k = rng.gen_range(2..=4);
            let base: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..1.0)).collect();
                    let s: f64 = raw.iter().sum();
                    raw.iter().map(|x| (x / s).ln()).collect()
                })
                .collect();
            let mut pen = BigramPenalty::zeros(k);
            for v in pen.transition.iter_mut().chain(&mut pen.start).chain(&mut pen.end) {
                *v = match rng.gen_range(0..4) {
                    0 => f64::NEG_INFINITY,
                    1 => -rng.gen_range(0.0..6.0),
                    _ => 0.0,
                };
            }
            let Ok(q) = ChainTeacherQuery::new(base, pen) else { continue };
            let (marg, best) = brute(&q);
            for (a, b) in chain_marginals(&q).iter().flatten().zip(marg.iter().flatten()) {
                assert!((a - b).abs() < 1e-9);
            }
            let map = chain_map_decode(&q);
            assert!((q.log_weight(&map) - q.log_weight(&best)).abs() < 1e-12);
        }
    }

    #[test]
    fn ffbs_samples_follow_marginals() {
        let q = ChainTeacherQuery::new(ln(&[&[0.5, 0.5], &[0.5, 0.5]]), forbid_0_to_1()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts = [0usize; 2];
        let n = 30_000;
        for _ in 0..n {
            let s = q.sample(&mut rng);
            assert_ne!(s, vec![0, 1]);
            counts[s[0]] += 1;
        }
        assert!((counts[1] as f64 / n as f64 - 2.0 / 3.0).abs() < 0.01);
    }
}
