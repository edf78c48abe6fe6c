//! Window MLP tagger: each position sees the embeddings of its neighbours
//! within a fixed radius and is classified independently.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::params::glorot;
use super::{trim_input, ParamBlock, ParamSet, Predictor, PredictorError, PAD};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggerConfig {
    pub vocab_size: usize,
    pub dim: usize,
    pub radius: usize,
    pub hidden: usize,
    pub num_labels: usize,
}

impl TaggerConfig {
    /// Default sizes: 32-dimensional embeddings, radius 2, 32 hidden units.
    pub fn small(vocab_size: usize, num_labels: usize) -> Self {
        Self {
            vocab_size,
            dim: 32,
            radius: 2,
            hidden: 32,
            num_labels,
        }
    }

    fn input_width(&self) -> usize {
        (2 * self.radius + 1) * self.dim
    }
}

/// Per-position tagger. Neighbours outside the sentence read the padding
/// embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceTagger {
    config: TaggerConfig,
    params: ParamSet,
}

const EMB: usize = 0;
const W1: usize = 1;
const B1: usize = 2;
const W2: usize = 3;
const B2: usize = 4;

impl SequenceTagger {
    pub fn new(config: TaggerConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_in = config.input_width();
        let blocks = vec![
            ParamBlock::uniform("embedding", &[config.vocab_size, config.dim], 0.05, &mut rng),
            ParamBlock::uniform(
                "hidden.weight",
                &[config.hidden, n_in],
                glorot(n_in, config.hidden),
                &mut rng,
            ),
            ParamBlock::zeros("hidden.bias", &[config.hidden]),
            ParamBlock::uniform(
                "output.weight",
                &[config.num_labels, config.hidden],
                glorot(config.hidden, config.num_labels),
                &mut rng,
            ),
            ParamBlock::zeros("output.bias", &[config.num_labels]),
        ];
        Self {
            config,
            params: ParamSet { blocks },
        }
    }

    pub fn from_parts(config: TaggerConfig, params: ParamSet) -> Result<Self, PredictorError> {
        let fresh = Self::new(config.clone(), 0);
        if !fresh.params.same_shape(&params) {
            return Err(PredictorError::Checkpoint(
                "parameter shapes do not match the tagger configuration".into(),
            ));
        }
        Ok(Self { config, params })
    }

    pub fn config(&self) -> &TaggerConfig {
        &self.config
    }

    fn window(&self, tokens: &[usize], t: usize) -> Vec<usize> {
        let r = self.config.radius;
        (0..=2 * r)
            .map(|o| {
                (t + o)
                    .checked_sub(r)
                    .and_then(|i| tokens.get(i).copied())
                    .unwrap_or(PAD)
            })
            .collect()
    }

    fn input(&self, tokens: &[usize], t: usize) -> Vec<f64> {
        let emb = &self.params.blocks[EMB];
        self.window(tokens, t).into_iter().flat_map(|tok| emb.row(tok).iter().copied()).collect()
    }

    fn hidden(&self, x: &[f64]) -> Vec<f64> {
        let w = &self.params.blocks[W1];
        let b = &self.params.blocks[B1].data;
        (0..self.config.hidden)
            .map(|h| (b[h] + w.row(h).iter().zip(x).map(|(a, v)| a * v).sum::<f64>()).tanh())
            .collect()
    }

    fn output(&self, h: &[f64]) -> Vec<f64> {
        let w = &self.params.blocks[W2];
        let b = &self.params.blocks[B2].data;
        (0..self.config.num_labels)
            .map(|k| b[k] + w.row(k).iter().zip(h).map(|(a, v)| a * v).sum::<f64>())
            .collect()
    }
}

impl Predictor for SequenceTagger {
    fn params(&self) -> &ParamSet {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    fn num_labels(&self) -> usize {
        self.config.num_labels
    }

    fn logits(&self, tokens: &[usize]) -> Result<Vec<Vec<f64>>, PredictorError> {
        let tokens = trim_input(tokens, self.config.vocab_size)?;
        Ok((0..tokens.len())
            .map(|t| self.output(&self.hidden(&self.input(tokens, t))))
            .collect())
    }

    fn backward(
        &self,
        tokens: &[usize],
        dlogits: &[Vec<f64>],
        grads: &mut ParamSet,
    ) -> Result<(), PredictorError> {
        let tokens = trim_input(tokens, self.config.vocab_size)?;
        if dlogits.len() != tokens.len() {
            return Err(PredictorError::Dimension(format!(
                "{} gradient rows for {} positions",
                dlogits.len(),
                tokens.len()
            )));
        }
        let d = self.config.dim;
        let k = self.config.num_labels;
        let n_hidden = self.config.hidden;
        let w1 = &self.params.blocks[W1];
        let w2 = &self.params.blocks[W2];
        for (t, dz) in dlogits.iter().enumerate() {
            if dz.len() != k {
                return Err(PredictorError::Dimension(format!("row {t}: {} of {k}", dz.len())));
            }
            let x = self.input(tokens, t);
            let h = self.hidden(&x);
            let mut dh = vec![0.0; n_hidden];
            for c in 0..k {
                grads.blocks[B2].data[c] += dz[c];
                let g = grads.blocks[W2].row_mut(c);
                for j in 0..n_hidden {
                    g[j] += dz[c] * h[j];
                    dh[j] += dz[c] * w2.row(c)[j];
                }
            }
            let mut dx = vec![0.0; x.len()];
            for j in 0..n_hidden {
                let da = dh[j] * (1.0 - h[j] * h[j]);
                if da == 0.0 {
                    continue;
                }
                grads.blocks[B1].data[j] += da;
                let g = grads.blocks[W1].row_mut(j);
                let wrow = w1.row(j);
                for i in 0..x.len() {
                    g[i] += da * x[i];
                    dx[i] += da * wrow[i];
                }
            }
            for (slot, tok) in self.window(tokens, t).into_iter().enumerate() {
                let ge = grads.blocks[EMB].row_mut(tok);
                for e in 0..d {
                    ge[e] += dx[slot * d + e];
                }
            }
        }
        Ok(())
    }
}
