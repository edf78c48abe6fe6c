use crate::rulelib::{Prefix, Tag, TagSet};

/// Evaluation metrics for one model on one dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metrics {
    Classification {
        accuracy: f64,
    },
    Tagging {
        precision: f64,
        recall: f64,
        f1: f64,
        /// Share of sentences whose decoded tags form a valid BIOES sequence.
        validity: f64,
    },
}

impl Metrics {
    /// Accuracy for classification, F1 for tagging.
    pub fn primary(&self) -> f64 {
        match *self {
            Metrics::Classification { accuracy } => accuracy,
            Metrics::Tagging { f1, .. } => f1,
        }
    }

    /// Named values in a fixed order.
    pub fn fields(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Metrics::Classification { accuracy } => vec![("accuracy", accuracy)],
            Metrics::Tagging {
                precision,
                recall,
                f1,
                validity,
            } => vec![
                ("precision", precision),
                ("recall", recall),
                ("f1", f1),
                ("validity", validity),
            ],
        }
    }
}

pub fn accuracy(pred: &[usize], gold: &[usize]) -> f64 {
    assert_eq!(pred.len(), gold.len());
    if gold.is_empty() {
        return 0.0;
    }
    pred.iter().zip(gold).filter(|(a, b)| a == b).count() as f64 / gold.len() as f64
}

/// Entity spans `(start, end_exclusive, category)` read strictly: only
/// `S` or `B I* E` runs of one category count; anything else is dropped.
pub fn entity_spans(tagset: &TagSet, tags: &[usize]) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    let mut open: Option<(usize, usize)> = None;
    for (i, &t) in tags.iter().enumerate() {
        match tagset.tag(t) {
            Tag::O => open = None,
            Tag::Entity { prefix, category } => match prefix {
                Prefix::S => {
                    out.push((i, i + 1, category));
                    open = None;
                }
                Prefix::B => open = Some((i, category)),
                Prefix::I => {
                    if open.is_none_or(|(_, c)| c != category) {
                        open = None;
                    }
                }
                Prefix::E => {
                    if let Some((s, c)) = open {
                        if c == category {
                            out.push((s, i + 1, c));
                        }
                    }
                    open = None;
                }
            },
        }
    }
    out
}

/// Exact-match span precision, recall and F1 over a corpus.
pub fn span_prf(tagset: &TagSet, pred: &[Vec<usize>], gold: &[Vec<usize>]) -> (f64, f64, f64) {
    let mut tp = 0usize;
    let mut n_pred = 0usize;
    let mut n_gold = 0usize;
    for (p, g) in pred.iter().zip(gold) {
        let ps = entity_spans(tagset, p);
        let gs = entity_spans(tagset, g);
        n_pred += ps.len();
        n_gold += gs.len();
        tp += ps.iter().filter(|s| gs.contains(s)).count();
    }
    let precision = if n_pred == 0 { 0.0 } else { tp as f64 / n_pred as f64 };
    let recall = if n_gold == 0 { 0.0 } else { tp as f64 / n_gold as f64 };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (precision, recall, f1)
}

pub fn tagging_metrics(tagset: &TagSet, pred: &[Vec<usize>], gold: &[Vec<usize>]) -> Metrics {
    let (precision, recall, f1) = span_prf(tagset, pred, gold);
    let valid = pred.iter().filter(|p| tagset.is_valid_sequence(p)).count();
    Metrics::Tagging {
        precision,
        recall,
        f1,
        validity: if pred.is_empty() { 1.0 } else { valid as f64 / pred.len() as f64 },
    }
}

/// Sample mean and standard deviation (n − 1 denominator; 0 for n < 2).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
