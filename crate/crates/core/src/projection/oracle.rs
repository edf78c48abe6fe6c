//! Numeric check of the closed-form projection.
//!
//! Solves the primal directly: minimize over the simplex
//!
//! ```text
//! F(q) = KL(q ‖ p) + C · Σ_{l,g} max{0, λ_l · (1 − E_q[r_lg])}
//! ```
//!
//! with the slack variables eliminated, by exponentiated-gradient descent.
//! Hard groundings are enforced by restricting the support to candidates
//! that satisfy them. The closed form is never consulted while solving.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{project, Confidence, Grounding, ProjectionProblem, TeacherPosterior};
use crate::logspace::{kl_divergence, log_sum_exp, normalize_log};
use crate::softlogic::TruthValue;

#[derive(Debug, Clone, Copy)]
pub struct OracleSettings {
    pub step: f64,
    pub max_iters: usize,
    /// Stop once the largest log-probability change in one step is below this.
    pub stop_delta: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            step: 0.5,
            max_iters: 20_000,
            stop_delta: 1e-13,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimalityReport {
    /// KL(numeric optimum ‖ closed form).
    pub kl: f64,
    pub objective_numeric: f64,
    pub objective_closed: f64,
    /// `F(closed) − F(numeric)`; non-positive up to rounding when the closed
    /// form is optimal.
    pub objective_gap: f64,
    /// `−log Z`, the dual value at `η = C`.
    pub dual_value: f64,
    pub iterations: usize,
    /// `false` means the oracle did not converge and the report proves nothing.
    pub converged: bool,
    pub passed: bool,
}

impl OptimalityReport {
    pub fn inconclusive(&self) -> bool {
        !self.converged
    }
}

/// Primal objective with slack eliminated. `q` is a probability vector.
fn primal_objective(problem: &ProjectionProblem, q: &[f64]) -> f64 {
    let p: Vec<f64> = problem.base_log_probs().iter().map(|l| l.exp()).collect();
    let mut f = kl_divergence(q, &p);
    for g in problem.groundings() {
        let expect: f64 = q.iter().zip(&g.truths).map(|(qi, r)| qi * r.value()).sum();
        match g.confidence {
            Confidence::Finite(lambda) => {
                f += problem.strength() * (lambda * (1.0 - expect)).max(0.0);
            }
            Confidence::Hard => {
                if expect < 1.0 - 1e-12 {
                    return f64::INFINITY;
                }
            }
        }
    }
    f
}

/// Runs the oracle and compares it with `closed`.
pub fn verify_optimality(
    problem: &ProjectionProblem,
    closed: &TeacherPosterior,
    tolerance: f64,
    settings: OracleSettings,
) -> OptimalityReport {
    let n = problem.num_candidates();
    let logp = problem.base_log_probs();
    let support: Vec<bool> = (0..n)
        .map(|y| {
            logp[y] > f64::NEG_INFINITY
                && problem
                    .groundings()
                    .iter()
                    .all(|g| !(g.confidence.is_hard() && g.truths[y].value() < 1.0))
        })
        .collect();

    let mut logq: Vec<f64> = support
        .iter()
        .map(|&s| if s { 0.0 } else { f64::NEG_INFINITY })
        .collect();
    let empty = normalize_log(&mut logq) == f64::NEG_INFINITY;

    let mut iterations = 0;
    let mut converged = false;
    if !empty {
        while iterations < settings.max_iters {
            iterations += 1;
            let q: Vec<f64> = logq.iter().map(|l| l.exp()).collect();
            // Subgradient of the eliminated slack: active where λ(1 − E_q r) > 0.
            let mut rule_grad = vec![0.0; n];
            for g in problem.groundings() {
                if let Confidence::Finite(lambda) = g.confidence {
                    let expect: f64 = q.iter().zip(&g.truths).map(|(qi, r)| qi * r.value()).sum();
                    if lambda * (1.0 - expect) > 0.0 {
                        for (gy, r) in rule_grad.iter_mut().zip(&g.truths) {
                            *gy -= problem.strength() * lambda * r.value();
                        }
                    }
                }
            }
            let mut next = logq.clone();
            for y in 0..n {
                if support[y] {
                    let grad = logq[y] - logp[y] + 1.0 + rule_grad[y];
                    next[y] = logq[y] - settings.step * grad;
                }
            }
            normalize_log(&mut next);
            let delta = (0..n)
                .filter(|&y| support[y])
                .map(|y| (next[y] - logq[y]).abs())
                .fold(0.0, f64::max);
            logq = next;
            if delta < settings.stop_delta {
                converged = true;
                break;
            }
        }
    }

    let q_num: Vec<f64> = logq.iter().map(|l| l.exp()).collect();
    let q_closed = closed.probs();
    // KL is non-negative; rounding can push the sum a hair below zero.
    let kl = if empty { f64::INFINITY } else { kl_divergence(&q_num, &q_closed).max(0.0) };
    let objective_numeric = primal_objective(problem, &q_num);
    let objective_closed = primal_objective(problem, &q_closed);
    let converged = converged && !empty;
    OptimalityReport {
        kl,
        objective_numeric,
        objective_closed,
        objective_gap: objective_closed - objective_numeric,
        dual_value: -closed.log_normalizer(),
        iterations,
        converged,
        passed: converged && kl < tolerance,
    }
}

/// Draws a random enumerable problem: `2..=max_k` candidates, `1..=max_l`
/// rules with one or two groundings each, confidences from `lambdas`.
pub fn random_problem<R: Rng>(
    rng: &mut R,
    max_k: usize,
    max_l: usize,
    lambdas: &[f64],
    c: f64,
) -> ProjectionProblem {
    let k = rng.gen_range(2..=max_k.max(2));
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    let mut logp: Vec<f64> = raw.iter().map(|x| (x / s).ln()).collect();
    let z = log_sum_exp(&logp);
    logp.iter_mut().for_each(|l| *l -= z);
    let rules = rng.gen_range(1..=max_l.max(1));
    let mut groundings = Vec::new();
    for _ in 0..rules {
        let lambda = lambdas[rng.gen_range(0..lambdas.len())];
        for _ in 0..rng.gen_range(1..=2) {
            let truths = (0..k)
                .map(|_| {
                    let t = if rng.gen_bool(0.25) { 1.0 } else { rng.gen_range(0.0..1.0) };
                    TruthValue::new(t).expect("sampled in range")
                })
                .collect();
            groundings.push(Grounding {
                confidence: Confidence::new(lambda).expect("valid lambda"),
                truths,
            });
        }
    }
    ProjectionProblem::new(logp, groundings, c).expect("well-formed random problem")
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub trials: usize,
    pub failures: usize,
    pub inconclusive: usize,
    pub max_kl: f64,
    /// The trial with the largest KL (or the first inconclusive one).
    pub worst: Option<(usize, ProjectionProblem, OptimalityReport)>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Randomized closed-form-versus-oracle sweep (`K ≤ 4`, `L ≤ 3`,
/// `λ ∈ {0.5, 1, 2}`, `C = 6`).
pub fn verification_sweep(seed: u64, trials: usize, tolerance: f64) -> SweepReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SweepReport {
        trials,
        failures: 0,
        inconclusive: 0,
        max_kl: 0.0,
        worst: None,
    };
    for trial in 0..trials {
        let problem = random_problem(&mut rng, 4, 3, &[0.5, 1.0, 2.0], 6.0);
        let closed = project(&problem).expect("finite confidences are always feasible");
        let r = verify_optimality(&problem, &closed, tolerance, OracleSettings::default());
        if !r.passed {
            report.failures += 1;
        }
        if r.inconclusive() {
            report.inconclusive += 1;
        }
        let worse = match &report.worst {
            None => true,
            Some((_, _, w)) => (r.inconclusive() && !w.inconclusive()) || r.kl > w.kl,
        };
        report.max_kl = report.max_kl.max(r.kl);
        if worse {
            report.worst = Some((trial, problem, r));
        }
    }
    report
}
