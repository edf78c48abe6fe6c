use serde::{Deserialize, Serialize};

use super::ParamSet;

/// Adadelta: per-parameter step sizes from running averages of squared
/// gradients and squared updates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Adadelta {
    pub rho: f64,
    pub eps: f64,
    /// Multiplier on the computed update.
    pub lr: f64,
    sq_grad: Vec<Vec<f64>>,
    sq_update: Vec<Vec<f64>>,
}

impl Default for Adadelta {
    fn default() -> Self {
        Self::new(0.95, 1e-6, 1.0)
    }
}

impl Adadelta {
    pub fn new(rho: f64, eps: f64, lr: f64) -> Self {
        Self {
            rho,
            eps,
            lr,
            sq_grad: Vec::new(),
            sq_update: Vec::new(),
        }
    }

    pub fn step(&mut self, params: &mut ParamSet, grads: &ParamSet) {
        if self.sq_grad.len() != params.blocks.len() {
            self.sq_grad = params.blocks.iter().map(|b| vec![0.0; b.data.len()]).collect();
            self.sq_update = self.sq_grad.clone();
        }
        let (rho, eps, lr) = (self.rho, self.eps, self.lr);
        for (b, block) in params.blocks.iter_mut().enumerate() {
            let g = &grads.blocks[b].data;
            let eg = &mut self.sq_grad[b];
            let ex = &mut self.sq_update[b];
            for i in 0..block.data.len() {
                eg[i] = rho * eg[i] + (1.0 - rho) * g[i] * g[i];
                let dx = -((ex[i] + eps).sqrt() / (eg[i] + eps).sqrt()) * g[i];
                ex[i] = rho * ex[i] + (1.0 - rho) * dx * dx;
                block.data[i] += lr * dx;
            }
        }
    }
}
