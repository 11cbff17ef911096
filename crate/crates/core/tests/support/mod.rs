//! Independent oracles shared by the integration tests and the acceptance
//! suite. Nothing here calls into the code it checks.

#![allow(dead_code)]

pub mod fixtures;
pub mod mock;

use std::collections::{BTreeMap, BTreeSet};

use lqca_core::merge::{DirectDistances, GlobalMention, MentionId};
use lqca_core::resolver::LocalClustering;
use lqca_core::segmenter::Chunk;
use rand::Rng;

/// Best product over every simple path, for every pair `(a, b)` with `a < b`
/// joined by at least one path.
pub fn brute_force_max_product(direct: &DirectDistances) -> BTreeMap<(usize, usize), f64> {
    let mut adj: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for (&(a, b), &w) in direct {
        adj.entry(a.0).or_default().push((b.0, w));
        adj.entry(b.0).or_default().push((a.0, w));
    }
    let mut best = BTreeMap::new();
    for &source in adj.keys() {
        let mut on_path = BTreeSet::from([source]);
        walk(&adj, source, source, 1.0, &mut on_path, &mut best);
    }
    best
}

fn walk(
    adj: &BTreeMap<usize, Vec<(usize, f64)>>,
    source: usize,
    node: usize,
    product: f64,
    on_path: &mut BTreeSet<usize>,
    best: &mut BTreeMap<(usize, usize), f64>,
) {
    for &(next, w) in &adj[&node] {
        if on_path.contains(&next) {
            continue;
        }
        let p = product * w;
        if source < next && p > 0.0 {
            let slot = best.entry((source, next)).or_insert(0.0);
            if p > *slot {
                *slot = p;
            }
        }
        on_path.insert(next);
        walk(adj, source, next, p, on_path, best);
        on_path.remove(&next);
    }
}

pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }

    /// Groups as sorted member lists, ordered by smallest member.
    pub fn groups(&mut self) -> Vec<Vec<usize>> {
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..self.parent.len() {
            let r = self.find(x);
            by_root.entry(r).or_default().push(x);
        }
        let mut groups: Vec<Vec<usize>> = by_root.into_values().collect();
        groups.sort();
        groups
    }
}

/// Random undirected graph on `n` nodes; each pair is an edge with
/// probability `density` and a weight in `(0, 1]`.
pub fn random_direct(rng: &mut impl Rng, n: usize, density: f64) -> DirectDistances {
    let mut direct = DirectDistances::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(density) {
                direct.insert((MentionId(a), MentionId(b)), 1.0 - rng.gen::<f64>());
            }
        }
    }
    direct
}

/// Per pair of global mentions: (chunks where both appear, chunks where the
/// chunk also clusters them together). Recounted from raw spans.
pub fn recount_votes(
    clusterings: &[LocalClustering],
    chunks: &[Chunk],
    mentions: &[GlobalMention],
) -> BTreeMap<(usize, usize), (u32, u32)> {
    let by_span: BTreeMap<(usize, usize), usize> = mentions
        .iter()
        .map(|m| ((m.start, m.end), m.id.0))
        .collect();
    let mut out = BTreeMap::new();
    for c in clusterings {
        let offset = chunks[c.chunk_index].start;
        let global =
            |i: usize| by_span[&(offset + c.mentions[i].start, offset + c.mentions[i].end)];
        let present: BTreeSet<usize> = (0..c.mentions.len()).map(global).collect();
        let mut together = BTreeSet::new();
        for cluster in &c.clusters {
            for &x in cluster {
                for &y in cluster {
                    let (gx, gy) = (global(x), global(y));
                    if gx < gy {
                        together.insert((gx, gy));
                    }
                }
            }
        }
        let present: Vec<usize> = present.into_iter().collect();
        for (i, &a) in present.iter().enumerate() {
            for &b in &present[i + 1..] {
                let e = out.entry((a, b)).or_insert((0, 0));
                e.0 += 1;
                if together.contains(&(a, b)) {
                    e.1 += 1;
                }
            }
        }
    }
    out
}

/// Member spans of each cluster as a set of sets, for order-free comparison.
pub fn span_partition(
    groups: impl IntoIterator<Item = Vec<(usize, usize)>>,
) -> BTreeSet<BTreeSet<(usize, usize)>> {
    groups
        .into_iter()
        .map(|g| g.into_iter().collect())
        .collect()
}
