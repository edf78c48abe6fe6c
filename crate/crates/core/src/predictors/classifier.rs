//! Convolution over word vectors, max-over-time pooling, softmax output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::params::glorot;
use super::{trim_input, ParamBlock, ParamSet, Predictor, PredictorError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub vocab_size: usize,
    pub dim: usize,
    /// Filter window widths, in tokens.
    pub widths: Vec<usize>,
    /// Feature maps per width.
    pub maps: usize,
    pub num_labels: usize,
}

impl ClassifierConfig {
    /// Default sizes: 32-dimensional embeddings, widths {2, 3} with 16 maps.
    pub fn small(vocab_size: usize, num_labels: usize) -> Self {
        Self {
            vocab_size,
            dim: 32,
            widths: vec![2, 3],
            maps: 16,
            num_labels,
        }
    }

    fn features(&self) -> usize {
        self.widths.len() * self.maps
    }
}

/// Text classifier. Inputs shorter than a filter are zero-padded to its
/// width; activations are `tanh`.
#[derive(Debug, Clone, PartialEq)]
pub struct TextClassifier {
    config: ClassifierConfig,
    params: ParamSet,
}

struct Pooled {
    features: Vec<f64>,
    /// Winning window start per feature.
    argmax: Vec<usize>,
}

impl TextClassifier {
    pub fn new(config: ClassifierConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = config.dim;
        let mut blocks = vec![ParamBlock::uniform(
            "embedding",
            &[config.vocab_size, d],
            0.05,
            &mut rng,
        )];
        for &w in &config.widths {
            let bound = glorot(w * d, config.maps);
            blocks.push(ParamBlock::uniform(
                format!("conv{w}.weight"),
                &[config.maps, w * d],
                bound,
                &mut rng,
            ));
            blocks.push(ParamBlock::zeros(format!("conv{w}.bias"), &[config.maps]));
        }
        let f = config.features();
        blocks.push(ParamBlock::uniform(
            "output.weight",
            &[config.num_labels, f],
            glorot(f, config.num_labels),
            &mut rng,
        ));
        blocks.push(ParamBlock::zeros("output.bias", &[config.num_labels]));
        Self {
            config,
            params: ParamSet { blocks },
        }
    }

    pub fn from_parts(config: ClassifierConfig, params: ParamSet) -> Result<Self, PredictorError> {
        let fresh = Self::new(config.clone(), 0);
        if !fresh.params.same_shape(&params) {
            return Err(PredictorError::Checkpoint(
                "parameter shapes do not match the classifier configuration".into(),
            ));
        }
        Ok(Self { config, params })
    }

    pub fn config(&self) -> &ClassifierConfig {
        &self.config
    }

    fn out_index(&self) -> usize {
        1 + 2 * self.config.widths.len()
    }

    fn pool(&self, tokens: &[usize]) -> Pooled {
        let d = self.config.dim;
        let maps = self.config.maps;
        let emb = &self.params.blocks[0];
        let mut features = Vec::with_capacity(self.config.features());
        let mut argmax = Vec::with_capacity(self.config.features());
        for (wi, &w) in self.config.widths.iter().enumerate() {
            let weight = &self.params.blocks[1 + 2 * wi];
            let bias = &self.params.blocks[2 + 2 * wi].data;
            let windows = tokens.len().max(w) - w + 1;
            for m in 0..maps {
                let row = weight.row(m);
                let mut best = f64::NEG_INFINITY;
                let mut best_i = 0;
                for i in 0..windows {
                    let mut pre = bias[m];
                    for j in 0..w {
                        if let Some(&tok) = tokens.get(i + j) {
                            let x = emb.row(tok);
                            let wj = &row[j * d..(j + 1) * d];
                            pre += wj.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                        }
                    }
                    if pre > best {
                        best = pre;
                        best_i = i;
                    }
                }
                features.push(best.tanh());
                argmax.push(best_i);
            }
        }
        Pooled { features, argmax }
    }
}

impl Predictor for TextClassifier {
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
        let pooled = self.pool(tokens);
        let o = self.out_index();
        let w = &self.params.blocks[o];
        let b = &self.params.blocks[o + 1].data;
        let z = (0..self.config.num_labels)
            .map(|k| b[k] + w.row(k).iter().zip(&pooled.features).map(|(a, x)| a * x).sum::<f64>())
            .collect();
        Ok(vec![z])
    }

    fn backward(
        &self,
        tokens: &[usize],
        dlogits: &[Vec<f64>],
        grads: &mut ParamSet,
    ) -> Result<(), PredictorError> {
        let tokens = trim_input(tokens, self.config.vocab_size)?;
        let [dz] = dlogits else {
            return Err(PredictorError::Dimension(format!(
                "classifier has one output row, got {}",
                dlogits.len()
            )));
        };
        let k = self.config.num_labels;
        if dz.len() != k {
            return Err(PredictorError::Dimension(format!("{} logit gradients for {k} labels", dz.len())));
        }
        let pooled = self.pool(tokens);
        let o = self.out_index();
        let f = self.config.features();

        let mut dfeat = vec![0.0; f];
        {
            let w = &self.params.blocks[o];
            let (gw, rest) = grads.blocks[o..].split_at_mut(1);
            for c in 0..k {
                let g = dz[c];
                rest[0].data[c] += g;
                let grow = gw[0].row_mut(c);
                for (j, x) in pooled.features.iter().enumerate() {
                    grow[j] += g * x;
                    dfeat[j] += g * w.row(c)[j];
                }
            }
        }

        let d = self.config.dim;
        let maps = self.config.maps;
        let emb = &self.params.blocks[0];
        for (wi, &w) in self.config.widths.iter().enumerate() {
            let weight = &self.params.blocks[1 + 2 * wi];
            for m in 0..maps {
                let fi = wi * maps + m;
                let h = pooled.features[fi];
                let dpre = dfeat[fi] * (1.0 - h * h);
                if dpre == 0.0 {
                    continue;
                }
                let start = pooled.argmax[fi];
                grads.blocks[2 + 2 * wi].data[m] += dpre;
                for j in 0..w {
                    let Some(&tok) = tokens.get(start + j) else {
                        continue;
                    };
                    let x = emb.row(tok);
                    let wrow = &weight.row(m)[j * d..(j + 1) * d];
                    let gw = &mut grads.blocks[1 + 2 * wi].row_mut(m)[j * d..(j + 1) * d];
                    for e in 0..d {
                        gw[e] += dpre * x[e];
                    }
                    let ge = grads.blocks[0].row_mut(tok);
                    for e in 0..d {
                        ge[e] += dpre * wrow[e];
                    }
                }
            }
        }
        Ok(())
    }
}
