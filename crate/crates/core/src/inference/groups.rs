//! Partitioning a batch into groups for joint inference.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A connected set of batch instances and the links kept inside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    /// Batch indices, ascending.
    pub members: Vec<usize>,
    /// Indices into the input link list, ascending.
    pub links: Vec<usize>,
}

struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        let (big, small) = if self.size[a] >= self.size[b] { (a, b) } else { (b, a) };
        self.parent[small] = big;
        self.size[big] += self.size[small];
    }
}

fn components(n: usize, links: &[(usize, usize)], active: &[bool]) -> Vec<usize> {
    let mut ds = DisjointSets::new(n);
    for (i, &(a, b)) in links.iter().enumerate() {
        if active[i] {
            ds.union(a, b);
        }
    }
    (0..n).map(|x| ds.find(x)).collect()
}

/// Connected components of the link graph over `n` instances. While a
/// component has more than `g_max` members, a uniformly chosen link inside
/// it is dropped. Links with an endpoint `≥ n` are ignored, as are
/// self-links, which never join instances but stay attached to their group.
pub fn form_groups(n: usize, links: &[(usize, usize)], g_max: usize, seed: u64) -> Vec<Group> {
    let g_max = g_max.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut active: Vec<bool> = links.iter().map(|&(a, b)| a < n && b < n).collect();

    let roots = loop {
        let roots = components(n, links, &active);
        let mut sizes = vec![0usize; n];
        roots.iter().for_each(|&r| sizes[r] += 1);
        let Some(big) = (0..n).find(|&r| sizes[r] > g_max) else {
            break roots;
        };
        let inside: Vec<usize> = (0..links.len())
            .filter(|&i| active[i] && links[i].0 != links[i].1 && roots[links[i].0] == big)
            .collect();
        let &drop = inside.choose(&mut rng).expect("oversize component has a link");
        active[drop] = false;
    };

    let mut by_root: Vec<Option<usize>> = vec![None; n];
    let mut groups: Vec<Group> = Vec::new();
    for x in 0..n {
        let r = roots[x];
        let gi = *by_root[r].get_or_insert_with(|| {
            groups.push(Group {
                members: Vec::new(),
                links: Vec::new(),
            });
            groups.len() - 1
        });
        groups[gi].members.push(x);
    }
    for (i, &(a, _)) in links.iter().enumerate() {
        if active[i] {
            let gi = by_root[roots[a]].unwrap();
            groups[gi].links.push(i);
        }
    }
    groups
}
