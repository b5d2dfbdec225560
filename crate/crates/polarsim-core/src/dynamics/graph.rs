//! Directed influence graphs and irreducibility.

use super::InfluenceMatrix;

/// Directed graph on agents; edge `i -> j` means agent j's state enters
/// agent i's update.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfluenceGraph {
    n: usize,
    adj: Vec<bool>,
}

impl InfluenceGraph {
    /// Edges are the strictly positive off-diagonal weights. Self-loops are
    /// ignored; reachability over distinct agents is what matters.
    pub fn from_influence(m: &InfluenceMatrix) -> Self {
        let n = m.n();
        let mut adj = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                adj[i * n + j] = i != j && m.get(i, j) > 0.0;
            }
        }
        Self { n, adj }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![false; n * n];
        for &(i, j) in edges {
            assert!(i < n && j < n, "edge ({i}, {j}) outside population {n}");
            if i != j {
                adj[i * n + j] = true;
            }
        }
        Self { n, adj }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }
}

/// True when every agent reaches every other agent along directed edges.
/// A single agent is trivially irreducible.
pub fn is_irreducible(graph: &InfluenceGraph) -> bool {
    let n = graph.n;
    if n <= 1 {
        return true;
    }
    // Boolean closure: after n rounds reach holds all paths of length <= n+1,
    // more than enough for any simple path.
    let mut reach = graph.adj.clone();
    for _ in 0..n {
        let prev = reach.clone();
        for i in 0..n {
            for k in 0..n {
                if prev[i * n + k] {
                    for j in 0..n {
                        reach[i * n + j] = reach[i * n + j] || graph.adj[k * n + j];
                    }
                }
            }
        }
        if reach == prev {
            break;
        }
    }
    (0..n).all(|i| (0..n).all(|j| i == j || reach[i * n + j]))
}
