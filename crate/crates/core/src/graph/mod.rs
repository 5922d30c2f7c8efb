//! Undirected weighted social graphs.
//!
//! Nodes are indexed `0..n` in the library API; the text formats in
//! [`crate::io`] use 1-based indices.

mod augmented;
pub mod generate;

pub use augmented::{build_augmented, AugmentedGraph, NodeRole, Stubbornness, StubbornnessProfile};
pub use generate::{generate, GraphKind};

use std::collections::VecDeque;

use crate::error::{domain, param, Result};

/// An undirected graph with positive edge weights and no self-loops or
/// parallel edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<(usize, f64)>>,
    edges: Vec<(usize, usize, f64)>,
}

impl Graph {
    /// Builds a graph from `(i, j, w)` triples. Each unordered pair may
    /// appear once.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if n == 0 {
            return param("graph needs at least one node");
        }
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut list = Vec::new();
        for (i, j, w) in edges {
            if i >= n || j >= n {
                return param(format!("edge ({i}, {j}) out of range for n = {n}"));
            }
            if i == j {
                return param(format!("self-loop at node {i}"));
            }
            if !(w.is_finite() && w > 0.0) {
                return param(format!("edge ({i}, {j}) has non-positive weight {w}"));
            }
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            list.push((a, b, w));
        }
        list.sort_by_key(|x| (x.0, x.1));
        for pair in list.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return param(format!("duplicate edge ({}, {})", pair[0].0, pair[0].1));
            }
        }
        for &(a, b, w) in &list {
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        for nb in &mut adj {
            nb.sort_by_key(|&(j, _)| j);
        }
        Ok(Graph {
            n,
            adj,
            edges: list,
        })
    }

    /// Unit-weight graph from index pairs.
    pub fn from_pairs<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_edges(n, pairs.into_iter().map(|(i, j)| (i, j, 1.0)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(i, j, w)` with `i < j`, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Neighbors of `i` with edge weights, sorted by neighbor index.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    /// Number of incident edges.
    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    /// Sum of incident edge weights; equals `degree` on unit-weight graphs.
    pub fn strength(&self, i: usize) -> f64 {
        self.adj[i].iter().map(|&(_, w)| w).sum()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    /// Sum of edge weights, `|E|` on unit-weight graphs.
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    pub fn is_unit_weight(&self) -> bool {
        self.edges.iter().all(|e| e.2 == 1.0)
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        self.adj[i]
            .binary_search_by_key(&j, |&(k, _)| k)
            .ok()
            .map(|p| self.adj[i][p].1)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.weight(i, j).is_some()
    }

    /// Hop distances from `src`; `None` for unreachable nodes.
    pub fn bfs_distances(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        dist[src] = Some(0);
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &(v, _) in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.bfs_distances(0).iter().all(Option::is_some)
    }

    /// Two-colorability by BFS over every component.
    pub fn is_bipartite(&self) -> bool {
        self.two_coloring().is_some()
    }

    /// A proper 2-coloring when one exists.
    pub fn two_coloring(&self) -> Option<Vec<u8>> {
        let mut color = vec![u8::MAX; self.n];
        let mut queue = VecDeque::new();
        for s in 0..self.n {
            if color[s] != u8::MAX {
                continue;
            }
            color[s] = 0;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &self.adj[u] {
                    if color[v] == u8::MAX {
                        color[v] = 1 - color[u];
                        queue.push_back(v);
                    } else if color[v] == color[u] {
                        return None;
                    }
                }
            }
        }
        Some(color)
    }

    /// Largest shortest-path hop count over all pairs.
    pub fn diameter(&self) -> Result<usize> {
        let mut best = 0;
        for s in 0..self.n {
            for d in self.bfs_distances(s) {
                match d {
                    Some(d) => best = best.max(d),
                    None => return domain("diameter of a disconnected graph"),
                }
            }
        }
        Ok(best)
    }

    pub(crate) fn require_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            domain("graph is not connected")
        }
    }
}

/// Stationary distribution of the simple random walk, `π_i = d_i / 2|E|`
/// (weighted strengths on weighted graphs).
pub fn stationary_distribution(g: &Graph) -> Result<Vec<f64>> {
    g.require_connected()?;
    if g.num_edges() == 0 {
        return domain("stationary distribution of an edgeless graph");
    }
    let total = 2.0 * g.total_weight();
    Ok((0..g.n()).map(|i| g.strength(i) / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_malformed_edges() {
        assert!(Graph::from_pairs(3, [(0, 0)]).is_err());
        assert!(Graph::from_pairs(3, [(0, 3)]).is_err());
        assert!(Graph::from_pairs(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(2, [(0, 1, 0.0)]).is_err());
        assert!(Graph::from_edges(2, [(0, 1, f64::NAN)]).is_err());
    }

    #[test]
    fn diameter_of_disconnected_graph_is_an_error() {
        let g = Graph::from_pairs(4, [(0, 1), (2, 3)]).unwrap();
        assert!(!g.is_connected());
        assert!(matches!(g.diameter(), Err(crate::Error::Domain(_))));
        assert!(stationary_distribution(&g).is_err());
    }

    #[test]
    fn star_stationary_distribution() {
        let g = generate(&GraphKind::Star { n: 4 }, None).unwrap();
        let pi = stationary_distribution(&g).unwrap();
        assert!((pi[0] - 0.5).abs() < 1e-15);
        for &p in &pi[1..] {
            assert!((p - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn ring_stationary_is_uniform() {
        let g = generate(&GraphKind::Ring { n: 8 }, None).unwrap();
        for p in stationary_distribution(&g).unwrap() {
            assert!((p - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn erdos_renyi_stationary_sums_to_one() {
        let mut seed = 11;
        let g = loop {
            let g = generate(&GraphKind::ErdosRenyi { n: 50, p: 0.2 }, Some(seed)).unwrap();
            if g.is_connected() {
                break g;
            }
            seed += 1;
        };
        let s: f64 = stationary_distribution(&g).unwrap().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    fn brute_bipartite(n: usize, edges: &[(usize, usize)]) -> bool {
        (0u32..(1 << n)).any(|mask| {
            edges
                .iter()
                .all(|&(i, j)| ((mask >> i) & 1) != ((mask >> j) & 1))
        })
    }

    fn small_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
        (1usize..=8).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .collect();
            let m = pairs.len();
            (Just(n), proptest::collection::vec(any::<bool>(), m)).prop_map(move |(n, keep)| {
                let edges = pairs
                    .iter()
                    .zip(keep)
                    .filter(|(_, k)| *k)
                    .map(|(p, _)| *p)
                    .collect();
                (n, edges)
            })
        })
    }

    proptest! {
        #[test]
        fn bipartite_matches_brute_force((n, edges) in small_graph()) {
            let g = Graph::from_pairs(n, edges.iter().copied()).unwrap();
            prop_assert_eq!(g.is_bipartite(), brute_bipartite(n, &edges));
        }

        #[test]
        fn handshake_lemma((n, edges) in small_graph()) {
            let g = Graph::from_pairs(n, edges.iter().copied()).unwrap();
            let deg_sum: usize = (0..n).map(|i| g.degree(i)).sum();
            prop_assert_eq!(deg_sum, 2 * g.num_edges());
        }
    }
}
