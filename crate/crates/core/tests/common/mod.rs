//! Reference computations shared by the integration tests. Everything here
//! is written from the definitions, without calling into the library's
//! inference or loss code.

#![allow(dead_code)]

use std::io::Write;

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Every label sequence of length `t` over `k` labels, in lexicographic order.
pub fn sequences(t: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..t {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..k).map(move |y| {
                    let mut s = s.clone();
                    s.push(y);
                    s
                })
            })
            .collect();
    }
    out
}

/// Log-weight tables of a first-order chain: `trans[a][b]`, `start[b]`, `end[a]`.
#[derive(Debug, Clone)]
pub struct Tables {
    pub trans: Vec<Vec<f64>>,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
}

pub fn chain_score(scores: &[Vec<f64>], tables: &Tables, ys: &[usize]) -> f64 {
    let mut w = tables.start[ys[0]] + tables.end[*ys.last().unwrap()];
    for (t, &y) in ys.iter().enumerate() {
        w += scores[t][y];
        if t > 0 {
            w += tables.trans[ys[t - 1]][y];
        }
    }
    w
}

pub struct Enumerated {
    pub marginals: Vec<Vec<f64>>,
    pub best: Vec<usize>,
    pub best_score: f64,
    /// Score of the runner-up, to tell whether the argmax is unique.
    pub second_score: f64,
}

/// Exact marginals and MAP of the chain by listing all `K^T` sequences.
pub fn enumerate_chain(scores: &[Vec<f64>], tables: &Tables) -> Enumerated {
    let (t, k) = (scores.len(), scores[0].len());
    let seqs = sequences(t, k);
    let w: Vec<f64> = seqs.iter().map(|s| chain_score(scores, tables, s)).collect();
    let z = log_sum_exp(&w);
    let mut marginals = vec![vec![0.0; k]; t];
    let mut order: Vec<usize> = (0..seqs.len()).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]));
    for (s, &ws) in seqs.iter().zip(&w) {
        let p = (ws - z).exp();
        for (pos, &y) in s.iter().enumerate() {
            marginals[pos][y] += p;
        }
    }
    Enumerated {
        marginals,
        best: seqs[order[0]].clone(),
        best_score: w[order[0]],
        second_score: order.get(1).map_or(f64::NEG_INFINITY, |&i| w[i]),
    }
}

/// A two-or-more member group: per-member scores (base plus unary), shared
/// chain tables, and pair tables between `(member, position)` sites.
pub struct GroupSpec {
    pub scores: Vec<Vec<Vec<f64>>>,
    pub tables: Tables,
    pub pairs: Vec<((usize, usize), (usize, usize), Vec<Vec<f64>>)>,
}

/// Exact per-site marginals of the group by joint enumeration.
pub fn enumerate_group(g: &GroupSpec) -> Vec<Vec<Vec<f64>>> {
    let k = g.scores[0][0].len();
    let per_member: Vec<Vec<Vec<usize>>> = g.scores.iter().map(|s| sequences(s.len(), k)).collect();
    let mut joint: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for seqs in &per_member {
        joint = joint
            .into_iter()
            .flat_map(|j| {
                seqs.iter().map(move |s| {
                    let mut j = j.clone();
                    j.push(s.clone());
                    j
                })
            })
            .collect();
    }
    let w: Vec<f64> = joint
        .iter()
        .map(|ys| {
            let mut w: f64 = ys
                .iter()
                .zip(&g.scores)
                .map(|(y, s)| chain_score(s, &g.tables, y))
                .sum();
            for (a, b, table) in &g.pairs {
                w += table[ys[a.0][a.1]][ys[b.0][b.1]];
            }
            w
        })
        .collect();
    let z = log_sum_exp(&w);
    let mut out: Vec<Vec<Vec<f64>>> = g.scores.iter().map(|s| vec![vec![0.0; k]; s.len()]).collect();
    for (ys, &wj) in joint.iter().zip(&w) {
        let p = (wj - z).exp();
        for (m, y) in ys.iter().enumerate() {
            for (t, &l) in y.iter().enumerate() {
                out[m][t][l] += p;
            }
        }
    }
    out
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// `(1 − π)·(−ln p_y) + π·(−Σ q ln p)` on the softmax of `logits`; the hard
/// term is dropped for unlabeled rows.
pub fn mixed_loss_reference(logits: &[f64], hard: Option<usize>, soft: &[f64], pi: f64) -> f64 {
    let lz = log_sum_exp(logits);
    let logp: Vec<f64> = logits.iter().map(|z| z - lz).collect();
    let imitation: f64 = -soft.iter().zip(&logp).map(|(q, l)| q * l).sum::<f64>();
    match hard {
        Some(y) => (1.0 - pi) * -logp[y] + pi * imitation,
        None => pi * imitation,
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Writes straight to stderr so the line shows even when test output is
/// captured.
pub fn verdict(id: usize, title: &str, ok: bool, detail: &str) {
    let tag = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {id:>2} [{tag}] {title}: {detail}");
}
