use super::{RuleError, TagSet};
use crate::softlogic::TruthValue;

/// Sums probability mass over all prefix variants of each entity category.
///
/// Entity categories come first in tag-set order; `O` is its own category and
/// sits last, so `n` entity categories collapse to an `n + 1` vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryCollapse {
    map: Vec<usize>,
    num_categories: usize,
}

impl CategoryCollapse {
    pub fn new(tags: &TagSet) -> Self {
        let n = tags.num_categories();
        let map = (0..tags.len())
            .map(|i| tags.tag(i).category().unwrap_or(n))
            .collect();
        Self {
            map,
            num_categories: n + 1,
        }
    }

    pub fn num_labels(&self) -> usize {
        self.map.len()
    }

    pub fn num_categories(&self) -> usize {
        self.num_categories
    }

    pub fn category_of(&self, label: usize) -> usize {
        self.map[label]
    }

    pub fn collapse(&self, dist: &[f64]) -> Result<Vec<f64>, RuleError> {
        if dist.len() != self.map.len() {
            return Err(RuleError::Dimension {
                got: dist.len(),
                expected: self.map.len(),
            });
        }
        let mut out = vec![0.0; self.num_categories];
        for (&c, &p) in self.map.iter().zip(dist) {
            out[c] += p;
        }
        Ok(out)
    }
}

/// `max{0, 1 − ‖c(e_y) − c(σ_A)‖₂}`.
///
/// The ℓ2 distance between a one-hot and a simplex vector can reach √2, so the
/// raw value is clamped at zero. With `normalize_sqrt2` the distance is
/// divided by √2 first and no clamp is needed.
pub fn list_rule_truth(
    collapse: &CategoryCollapse,
    y_of_x: usize,
    sigma_a: &[f64],
    normalize_sqrt2: bool,
) -> Result<TruthValue, RuleError> {
    if y_of_x >= collapse.num_labels() {
        return Err(RuleError::Dimension {
            got: y_of_x,
            expected: collapse.num_labels(),
        });
    }
    let ca = collapse.collapse(sigma_a)?;
    let cy = collapse.category_of(y_of_x);
    let sq: f64 = ca
        .iter()
        .enumerate()
        .map(|(c, &a)| {
            let e = if c == cy { 1.0 } else { 0.0 };
            (e - a) * (e - a)
        })
        .sum();
    let mut dist = sq.sqrt();
    if normalize_sqrt2 {
        dist /= std::f64::consts::SQRT_2;
    }
    Ok(TruthValue::new((1.0 - dist).clamp(0.0, 1.0))?)
}

/// How the counterpart's prediction `σ(A)` enters the list rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CounterpartMode {
    /// `σ(A)` is the counterpart's label in the joint teacher configuration
    /// (one-hot), which couples the two positions and calls for joint
    /// inference.
    #[default]
    Joint,
    /// `σ(A)` is the student's predicted distribution at the counterpart; the
    /// rule then factorizes per position.
    Student,
}

#[derive(Debug, Clone)]
pub struct ListRule {
    pub collapse: CategoryCollapse,
    pub normalize_sqrt2: bool,
    pub mode: CounterpartMode,
}

impl ListRule {
    pub fn new(tags: &TagSet) -> Self {
        Self {
            collapse: CategoryCollapse::new(tags),
            normalize_sqrt2: false,
            mode: CounterpartMode::default(),
        }
    }

    pub fn truth(&self, y_of_x: usize, sigma_a: &[f64]) -> Result<TruthValue, RuleError> {
        list_rule_truth(&self.collapse, y_of_x, sigma_a, self.normalize_sqrt2)
    }

    /// Truth table `r(y_x, y_a)` for joint mode, row-major `k × k`.
    pub fn pair_table(&self) -> Vec<f64> {
        let k = self.collapse.num_labels();
        let mut out = Vec::with_capacity(k * k);
        let mut onehot = vec![0.0; k];
        for yx in 0..k {
            for ya in 0..k {
                onehot[ya] = 1.0;
                out.push(self.truth(yx, &onehot).expect("in range").value());
                onehot[ya] = 0.0;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn onehot(k: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; k];
        v[i] = 1.0;
        v
    }

    #[test]
    fn collapse_layout_and_mass() {
        let tags = TagSet::new(&["ORG", "LOC", "PER", "MISC"]).unwrap();
        let c = CategoryCollapse::new(&tags);
        assert_eq!(c.num_categories(), 5);
        let mut d = vec![0.0; tags.len()];
        d[tags.parse("B-ORG").unwrap()] = 0.5;
        d[tags.parse("B-LOC").unwrap()] = 0.5;
        assert_eq!(c.collapse(&d).unwrap(), vec![0.5, 0.5, 0.0, 0.0, 0.0]);
        assert_eq!(c.collapse(&onehot(tags.len(), 0)).unwrap()[4], 1.0);
    }

    #[test]
    fn truth_examples() {
        let tags = TagSet::new(&["ORG", "LOC", "PER", "MISC"]).unwrap();
        let c = CategoryCollapse::new(&tags);
        let k = tags.len();
        let b_org = tags.parse("B-ORG").unwrap();
        let s_org = tags.parse("S-ORG").unwrap();
        let b_loc = tags.parse("B-LOC").unwrap();
        assert_eq!(list_rule_truth(&c, b_org, &onehot(k, s_org), false).unwrap().value(), 1.0);
        assert_eq!(list_rule_truth(&c, b_org, &onehot(k, b_loc), false).unwrap().value(), 0.0);
        let mut d = vec![0.0; k];
        d[b_org] = 0.5;
        d[b_loc] = 0.5;
        let v = list_rule_truth(&c, b_org, &d, false).unwrap().value();
        assert!((v - (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
        assert!((v - 0.2929).abs() < 1e-4);
        // √2-normalized variant of the disjoint case is exactly zero without clamping
        let v = list_rule_truth(&c, b_org, &onehot(k, b_loc), true).unwrap().value();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let tags = TagSet::conll();
        let c = CategoryCollapse::new(&tags);
        assert!(matches!(
            list_rule_truth(&c, 0, &[0.5, 0.5], false),
            Err(RuleError::Dimension { .. })
        ));
        assert!(c.collapse(&[1.0]).is_err());
    }

    #[test]
    fn pair_table_is_category_agreement() {
        let tags = TagSet::new(&["A", "B"]).unwrap();
        let rule = ListRule::new(&tags);
        let table = rule.pair_table();
        let k = tags.len();
        for x in 0..k {
            for a in 0..k {
                let same = tags.tag(x).category() == tags.tag(a).category();
                assert_eq!(table[x * k + a], if same { 1.0 } else { 0.0 });
            }
        }
    }
}
