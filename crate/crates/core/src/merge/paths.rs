//! All-pairs maximum-product paths.
//!
//! Each source runs a Dijkstra-style search where path length is the product
//! of edge weights and the frontier node with the *largest* distance is
//! settled first. Weights lie in `[0, 1]`, so extending a path never
//! increases its product and a settled node is final.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};

use super::{MentionId, PairKey};
use crate::par::Execution;

/// Direct distances of co-present pairs, keyed `(low, high)`.
pub type DirectDistances = BTreeMap<PairKey, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// The pair's own direct distance is the best path.
    Direct,
    /// A multi-edge path beats (or replaces a missing) direct distance.
    Propagated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceEntry {
    pub a: MentionId,
    pub b: MentionId,
    pub d: f64,
    pub provenance: Provenance,
}

pub type PathDistances = BTreeMap<PairKey, DistanceEntry>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxProductOptions {
    /// Only distances strictly above `floor` are explored and reported.
    /// Because products shrink along a path, every pair above the floor is
    /// still found exactly.
    pub floor: f64,
    pub execution: Execution,
}

impl Default for MaxProductOptions {
    fn default() -> Self {
        Self {
            floor: 0.0,
            execution: Execution::default(),
        }
    }
}

/// Compact adjacency over the nodes that appear in `direct`.
struct Adjacency {
    nodes: Vec<MentionId>,
    neighbors: Vec<Vec<(usize, f64)>>,
}

fn clamp_weight(key: PairKey, d: f64) -> f64 {
    if (0.0..=1.0).contains(&d) {
        return d;
    }
    let clamped = if d.is_nan() { 0.0 } else { d.clamp(0.0, 1.0) };
    log::warn!(
        "distance {d} for pair {:?}-{:?} clamped to {clamped}",
        key.0,
        key.1
    );
    clamped
}

impl Adjacency {
    fn new(direct: &DirectDistances) -> Self {
        let mut nodes: Vec<MentionId> = direct.keys().flat_map(|&(a, b)| [a, b]).collect();
        nodes.sort_unstable();
        nodes.dedup();
        let index: HashMap<MentionId, usize> =
            nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut neighbors = vec![Vec::new(); nodes.len()];
        for (&key, &d) in direct {
            if key.0 == key.1 {
                continue;
            }
            let w = clamp_weight(key, d);
            let (a, b) = (index[&key.0], index[&key.1]);
            neighbors[a].push((b, w));
            neighbors[b].push((a, w));
        }
        for list in &mut neighbors {
            list.sort_unstable_by_key(|&(n, _)| n);
        }
        Self { nodes, neighbors }
    }
}

#[derive(Debug, Clone, Copy)]
struct Frontier {
    d: f64,
    node: usize,
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frontier {}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frontier {
    /// Larger distance first, then lower node index.
    fn cmp(&self, other: &Self) -> Ordering {
        self.d
            .total_cmp(&other.d)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Best products from `source` to every node reachable above `floor`.
fn search(adj: &Adjacency, source: usize, floor: f64) -> HashMap<usize, f64> {
    let mut dist: HashMap<usize, f64> = HashMap::new();
    let mut settled: HashSet<usize> = HashSet::new();
    let mut heap = BinaryHeap::new();
    dist.insert(source, 1.0);
    heap.push(Frontier {
        d: 1.0,
        node: source,
    });
    while let Some(Frontier { d, node: u }) = heap.pop() {
        if !settled.insert(u) {
            continue;
        }
        for &(v, w) in &adj.neighbors[u] {
            if settled.contains(&v) {
                continue;
            }
            let alt = d * w;
            if alt > floor && alt > dist.get(&v).copied().unwrap_or(0.0) {
                dist.insert(v, alt);
                heap.push(Frontier { d: alt, node: v });
            }
        }
    }
    dist
}

/// Maximum over all paths of the product of direct distances, for every
/// connected pair. See [`all_pairs_max_product_with`].
pub fn all_pairs_max_product(direct: &DirectDistances) -> PathDistances {
    all_pairs_max_product_with(direct, &MaxProductOptions::default())
}

/// Runs one max-product search per source node and reports each pair
/// `(a, b)` from the search rooted at `a`. Entries whose best path is the
/// direct edge are marked [`Provenance::Direct`].
pub fn all_pairs_max_product_with(
    direct: &DirectDistances,
    options: &MaxProductOptions,
) -> PathDistances {
    let adj = Adjacency::new(direct);
    let sources: Vec<usize> = (0..adj.nodes.len()).collect();
    let rows = options.execution.map(&sources, |&source| {
        let mut row: Vec<DistanceEntry> = search(&adj, source, options.floor)
            .into_iter()
            .filter(|&(target, _)| target > source)
            .map(|(target, d)| {
                let (a, b) = (adj.nodes[source], adj.nodes[target]);
                let provenance = match direct.get(&(a, b)) {
                    Some(&w) if clamp_weight((a, b), w) >= d => Provenance::Direct,
                    _ => Provenance::Propagated,
                };
                DistanceEntry {
                    a,
                    b,
                    d,
                    provenance,
                }
            })
            .collect();
        row.sort_unstable_by_key(|e| e.b);
        row
    });
    rows.into_iter()
        .flatten()
        .map(|e| ((e.a, e.b), e))
        .collect()
}
