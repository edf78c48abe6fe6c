//! Gibbs sampling for groups of chains coupled by pairwise groundings.
//!
//! The default sampler is blocked: each sweep redraws one whole member
//! sequence from its exact conditional given the other members, by forward
//! filtering and backward sampling. Hard bigram constraints make single-site
//! updates reducible (a two-token entity cannot change category one token at
//! a time), which is why blocking is the default. Pair factors that join two
//! positions of the *same* member break the chain structure; for such members
//! the chain draw is used as an independence proposal with a
//! Metropolis–Hastings correction for the intra-member factors.
//!
//! Strongly coupled members make one-member-at-a-time updates sticky, so
//! every sweep also tries a group-wide move: all members are redrawn from
//! their own chains and the joint proposal is accepted on the change in
//! pair-factor weight.
//!
//! Marginals are Rao–Blackwellized where the exact conditional is available:
//! each kept sweep contributes the member's conditional marginals rather than
//! a one-hot sample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::chain::{chain_marginals, sample_log, ChainTeacherQuery};
use super::{BigramPenalty, InferenceError};

/// One instance of a group: base log-probabilities and fixed unary
/// log-penalties, both `T × K`.
#[derive(Debug, Clone)]
pub struct GroupMember {
    pub base_log_probs: Vec<Vec<f64>>,
    pub unary: Vec<Vec<f64>>,
}

impl GroupMember {
    pub fn new(base_log_probs: Vec<Vec<f64>>) -> Self {
        let unary = base_log_probs.iter().map(|r| vec![0.0; r.len()]).collect();
        Self {
            base_log_probs,
            unary,
        }
    }

    pub fn len(&self) -> usize {
        self.base_log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base_log_probs.is_empty()
    }
}

/// A pairwise grounding between `(member, position)` sites `a` and `b` with
/// log-weight table `log_table[y_a * K + y_b]`.
#[derive(Debug, Clone)]
pub struct PairFactor {
    pub a: (usize, usize),
    pub b: (usize, usize),
    pub log_table: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplerKind {
    #[default]
    Blocked,
    SingleSite,
}

#[derive(Debug, Clone, Copy)]
pub struct SamplerSettings {
    pub sweeps: usize,
    /// Defaults to 20% of `sweeps` when `None`.
    pub burn_in: Option<usize>,
    pub seed: u64,
    pub kind: SamplerKind,
}

impl SamplerSettings {
    pub fn training(seed: u64) -> Self {
        Self {
            sweeps: 200,
            burn_in: None,
            seed,
            kind: SamplerKind::Blocked,
        }
    }

    pub fn evaluation(seed: u64) -> Self {
        Self {
            sweeps: 2000,
            ..Self::training(seed)
        }
    }

    fn burn_in(&self) -> usize {
        self.burn_in.unwrap_or(self.sweeps / 5).min(self.sweeps.saturating_sub(1))
    }
}

#[derive(Debug, Clone)]
pub struct GroupTeacherQuery {
    pub members: Vec<GroupMember>,
    pub bigram: BigramPenalty,
    pub pairs: Vec<PairFactor>,
    pub settings: SamplerSettings,
}

impl GroupTeacherQuery {
    fn validate(&self) -> Result<(), InferenceError> {
        let k = self.bigram.k;
        for (m, mem) in self.members.iter().enumerate() {
            if mem.is_empty() {
                return Err(InferenceError::Empty);
            }
            let rows_ok = mem.base_log_probs.iter().all(|r| r.len() == k)
                && mem.unary.len() == mem.len()
                && mem.unary.iter().all(|r| r.len() == k);
            if !rows_ok {
                return Err(InferenceError::Shape(format!("member {m}")));
            }
        }
        for (i, f) in self.pairs.iter().enumerate() {
            let site_ok = |(m, t): (usize, usize)| self.members.get(m).is_some_and(|mm| t < mm.len());
            if !site_ok(f.a) || !site_ok(f.b) || f.a == f.b || f.log_table.len() != k * k {
                return Err(InferenceError::Shape(format!("pair factor {i}")));
            }
        }
        Ok(())
    }

    /// Unnormalized log-weight of a joint assignment.
    pub fn log_weight(&self, labels: &[Vec<usize>]) -> f64 {
        let k = self.bigram.k;
        let mut w = 0.0;
        for (mem, ys) in self.members.iter().zip(labels) {
            for (t, &y) in ys.iter().enumerate() {
                w += mem.base_log_probs[t][y] + mem.unary[t][y];
            }
            w += self.bigram.sequence_penalty(ys);
        }
        for f in &self.pairs {
            w += f.log_table[labels[f.a.0][f.a.1] * k + labels[f.b.0][f.b.1]];
        }
        w
    }
}

/// Contribution of cross-member pair factors to site `(m, t)` having label
/// `y`, given the current labels of the other sites.
fn cross_unary(q: &GroupTeacherQuery, m: usize, state: &[Vec<usize>]) -> Vec<Vec<f64>> {
    let k = q.bigram.k;
    let mut u = q.members[m].unary.clone();
    for f in &q.pairs {
        if f.a.0 == m && f.b.0 != m {
            let yb = state[f.b.0][f.b.1];
            for y in 0..k {
                u[f.a.1][y] += f.log_table[y * k + yb];
            }
        } else if f.b.0 == m && f.a.0 != m {
            let ya = state[f.a.0][f.a.1];
            for y in 0..k {
                u[f.b.1][y] += f.log_table[ya * k + y];
            }
        }
    }
    u
}

fn pair_weight(q: &GroupTeacherQuery, state: &[Vec<usize>]) -> f64 {
    let k = q.bigram.k;
    q.pairs
        .iter()
        .map(|f| f.log_table[state[f.a.0][f.a.1] * k + state[f.b.0][f.b.1]])
        .sum()
}

fn intra_weight(q: &GroupTeacherQuery, m: usize, ys: &[usize]) -> f64 {
    let k = q.bigram.k;
    q.pairs
        .iter()
        .filter(|f| f.a.0 == m && f.b.0 == m)
        .map(|f| f.log_table[ys[f.a.1] * k + ys[f.b.1]])
        .sum()
}

/// Independence proposals from the members' own chains per sweep.
const GROUP_MOVES: usize = 8;

/// Monte-Carlo estimate of per-member, per-position marginals.
pub fn gibbs_soft_predict(q: &GroupTeacherQuery) -> Result<Vec<Vec<Vec<f64>>>, InferenceError> {
    q.validate()?;
    let k = q.bigram.k;
    let settings = q.settings;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let has_intra: Vec<bool> = (0..q.members.len())
        .map(|m| q.pairs.iter().any(|f| f.a.0 == m && f.b.0 == m))
        .collect();

    // Each member's own chain, ignoring pair factors: initial state and
    // group-move proposal.
    let own: Vec<ChainTeacherQuery> = q
        .members
        .iter()
        .map(|mem| {
            ChainTeacherQuery::with_unary(mem.base_log_probs.clone(), Some(&mem.unary), q.bigram.clone())
        })
        .collect::<Result<_, _>>()?;
    let mut state: Vec<Vec<usize>> = own.iter().map(|c| c.sample(&mut rng)).collect();
    let mut current_pairs = pair_weight(q, &state);

    let mut acc: Vec<Vec<Vec<f64>>> = q
        .members
        .iter()
        .map(|mem| vec![vec![0.0; k]; mem.len()])
        .collect();
    let burn_in = settings.burn_in();
    let mut kept = 0usize;

    for sweep in 0..settings.sweeps.max(1) {
        let keep = sweep >= burn_in;
        // Joint redraws of every member are what lets strongly coupled
        // groups switch between category assignments; they are cheap, so
        // several are tried per sweep.
        for _ in 0..if q.pairs.is_empty() { 0 } else { GROUP_MOVES } {
            let proposal: Vec<Vec<usize>> = own.iter().map(|c| c.sample(&mut rng)).collect();
            let w = pair_weight(q, &proposal);
            let delta = w - current_pairs;
            if w > f64::NEG_INFINITY && (delta >= 0.0 || rng.gen::<f64>() < delta.exp()) {
                state = proposal;
                current_pairs = w;
            }
        }
        for m in 0..q.members.len() {
            match settings.kind {
                SamplerKind::Blocked => {
                    let unary = cross_unary(q, m, &state);
                    let chain = match ChainTeacherQuery::with_unary(
                        q.members[m].base_log_probs.clone(),
                        Some(&unary),
                        q.bigram.clone(),
                    ) {
                        Ok(c) => c,
                        // Conditional is empty under hard pair factors: stay put.
                        Err(InferenceError::Infeasible) => {
                            if keep {
                                add_onehot(&mut acc[m], &state[m]);
                            }
                            continue;
                        }
                        Err(e) => return Err(e),
                    };
                    let proposal = chain.sample(&mut rng);
                    if has_intra[m] {
                        // The block proposal ignores factors inside the
                        // member, so correct it with an MH step and follow
                        // up with exact site updates.
                        let delta = intra_weight(q, m, &proposal) - intra_weight(q, m, &state[m]);
                        if delta >= 0.0 || rng.gen::<f64>() < delta.exp() {
                            state[m] = proposal;
                        }
                        site_sweep(q, m, &mut state, &mut rng, keep.then_some(&mut acc[m]));
                    } else {
                        state[m] = proposal;
                        if keep {
                            for (row, marg) in acc[m].iter_mut().zip(chain_marginals(&chain)) {
                                row.iter_mut().zip(marg).for_each(|(a, v)| *a += v);
                            }
                        }
                    }
                }
                SamplerKind::SingleSite => {
                    site_sweep(q, m, &mut state, &mut rng, keep.then_some(&mut acc[m]));
                }
            }
        }
        current_pairs = pair_weight(q, &state);
        if keep {
            kept += 1;
        }
    }

    let denom = kept.max(1) as f64;
    for row in acc.iter_mut().flatten() {
        row.iter_mut().for_each(|v| *v /= denom);
    }
    Ok(acc)
}

/// One pass of exact single-site updates over member `m`, adding each
/// site's conditional to `acc` when given.
fn site_sweep(
    q: &GroupTeacherQuery,
    m: usize,
    state: &mut [Vec<usize>],
    rng: &mut ChaCha8Rng,
    mut acc: Option<&mut Vec<Vec<f64>>>,
) {
    for t in 0..q.members[m].len() {
        let cond = site_conditional(q, m, t, state);
        if cond.iter().all(|w| *w == f64::NEG_INFINITY) {
            if let Some(acc) = acc.as_deref_mut() {
                acc[t][state[m][t]] += 1.0;
            }
            continue;
        }
        state[m][t] = sample_log(&cond, rng);
        if let Some(acc) = acc.as_deref_mut() {
            let z = crate::logspace::log_sum_exp(&cond);
            for (a, w) in acc[t].iter_mut().zip(&cond) {
                *a += (w - z).exp();
            }
        }
    }
}

fn add_onehot(acc: &mut [Vec<f64>], ys: &[usize]) {
    for (row, &y) in acc.iter_mut().zip(ys) {
        row[y] += 1.0;
    }
}

/// Exact `log q(y_t = · | everything else)` up to a constant.
fn site_conditional(q: &GroupTeacherQuery, m: usize, t: usize, state: &[Vec<usize>]) -> Vec<f64> {
    let k = q.bigram.k;
    let mem = &q.members[m];
    let ys = &state[m];
    let mut out: Vec<f64> = (0..k)
        .map(|y| mem.base_log_probs[t][y] + mem.unary[t][y])
        .collect();
    for (y, o) in out.iter_mut().enumerate() {
        *o += if t == 0 {
            q.bigram.start[y]
        } else {
            q.bigram.at(ys[t - 1], y)
        };
        *o += if t + 1 == ys.len() {
            q.bigram.end[y]
        } else {
            q.bigram.at(y, ys[t + 1])
        };
    }
    for f in &q.pairs {
        if f.a == (m, t) {
            let yb = state[f.b.0][f.b.1];
            for (y, o) in out.iter_mut().enumerate() {
                *o += f.log_table[y * k + yb];
            }
        } else if f.b == (m, t) {
            let ya = state[f.a.0][f.a.1];
            for (y, o) in out.iter_mut().enumerate() {
                *o += f.log_table[ya * k + y];
            }
        }
    }
    out
}
