use rand::Rng;
use serde::{Deserialize, Serialize};

/// A named, row-major parameter tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBlock {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl ParamBlock {
    pub fn zeros(name: impl Into<String>, shape: &[usize]) -> Self {
        Self {
            name: name.into(),
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn uniform<R: Rng>(name: impl Into<String>, shape: &[usize], bound: f64, rng: &mut R) -> Self {
        let mut b = Self::zeros(name, shape);
        b.data.iter_mut().for_each(|x| *x = rng.gen_range(-bound..=bound));
        b
    }

    /// Row `r` of a 2-D block.
    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        let w = self.shape[1];
        &self.data[r * w..(r + 1) * w]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        let w = self.shape[1];
        &mut self.data[r * w..(r + 1) * w]
    }
}

/// The full parameter vector of a model, split into named blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub blocks: Vec<ParamBlock>,
}

impl ParamSet {
    pub fn zeros_like(&self) -> Self {
        Self {
            blocks: self
                .blocks
                .iter()
                .map(|b| ParamBlock::zeros(b.name.clone(), &b.shape))
                .collect(),
        }
    }

    pub fn count(&self) -> usize {
        self.blocks.iter().map(|b| b.data.len()).sum()
    }

    pub fn scale(&mut self, s: f64) {
        for b in &mut self.blocks {
            b.data.iter_mut().for_each(|x| *x *= s);
        }
    }

    pub fn same_shape(&self, other: &ParamSet) -> bool {
        self.blocks.len() == other.blocks.len()
            && self
                .blocks
                .iter()
                .zip(&other.blocks)
                .all(|(a, b)| a.name == b.name && a.shape == b.shape && a.data.len() == b.data.len())
    }
}

/// Glorot-uniform bound for a `fan_out × fan_in` weight matrix.
pub(crate) fn glorot(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}
