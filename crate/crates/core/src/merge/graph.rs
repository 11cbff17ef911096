use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use super::{GlobalCluster, MentionId, PairKey, PathDistances};

/// Undirected mention graph; `edges` are `(low, high)` pairs in sorted order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionGraph {
    pub node_count: usize,
    pub edges: Vec<PairKey>,
}

/// Keeps the pairs whose distance is strictly greater than `threshold`.
pub fn build_graph(node_count: usize, distances: &PathDistances, threshold: f64) -> MentionGraph {
    let edges = distances
        .iter()
        .filter(|(&(a, b), e)| a != b && e.d > threshold && b.0 < node_count)
        .map(|(&key, _)| key)
        .collect();
    MentionGraph { node_count, edges }
}

/// Connected components, each sorted, ordered by their first member.
pub fn components(graph: &MentionGraph) -> Vec<GlobalCluster> {
    let mut adj = vec![Vec::new(); graph.node_count];
    for &(a, b) in &graph.edges {
        adj[a.0].push(b.0);
        adj[b.0].push(a.0);
    }
    let mut seen = vec![false; graph.node_count];
    let mut clusters = Vec::new();
    let mut queue = VecDeque::new();
    for root in 0..graph.node_count {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        queue.push_back(root);
        let mut members = Vec::new();
        while let Some(u) = queue.pop_front() {
            members.push(MentionId(u));
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        members.sort_unstable();
        clusters.push(GlobalCluster {
            members,
            representative: None,
        });
    }
    clusters
}
