use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::error::{domain, Result};
use crate::graph::AugmentedGraph;

/// Shortest paths from every free agent into the absorbing set of `Ĝ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    /// Hop distance to the absorbing set, per augmented node.
    dist: Vec<Option<usize>>,
    /// Next node towards the absorbing set.
    parent: Vec<Option<usize>>,
    free: Vec<usize>,
    /// `γ_i` as node sequences, aligned with `free`.
    paths: Vec<Vec<usize>>,
    weighted: Vec<f64>,
    /// `(absorber, Γ_j)`, absorbers ascending.
    groups: Vec<(usize, Vec<usize>)>,
}

impl PathSet {
    /// Free agents, ascending; index space of [`Self::path_at`].
    pub fn free(&self) -> &[usize] {
        &self.free
    }

    pub fn distance(&self, node: usize) -> Option<usize> {
        self.dist[node]
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    /// Node sequence of `γ_i` for the `k`-th free agent, ending at an
    /// absorber.
    pub fn path_at(&self, k: usize) -> &[usize] {
        &self.paths[k]
    }

    /// Node sequence of `γ_i` for agent `i`, `None` for fully stubborn `i`.
    pub fn path(&self, i: usize) -> Option<&[usize]> {
        self.free
            .binary_search(&i)
            .ok()
            .map(|k| self.paths[k].as_slice())
    }

    /// `|γ_i|` in hops.
    pub fn hops_at(&self, k: usize) -> usize {
        self.paths[k].len() - 1
    }

    /// `|γ_i|_w = Σ 1/w_st` along the path.
    pub fn weighted_len_at(&self, k: usize) -> f64 {
        self.weighted[k]
    }

    /// Oriented edges of `γ_i`.
    pub fn edges_at(&self, k: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.paths[k].windows(2).map(|w| (w[0], w[1]))
    }

    /// `Γ_j` for each absorber `j`: agents routed to `j`, without the
    /// agent that owns `j` when `j` is a virtual node.
    pub fn groups(&self) -> &[(usize, Vec<usize>)] {
        &self.groups
    }

    /// `|γ|`.
    pub fn max_len(&self) -> usize {
        (0..self.paths.len())
            .map(|k| self.hops_at(k))
            .max()
            .unwrap_or(0)
    }

    /// `|Γ|`.
    pub fn max_group(&self) -> usize {
        self.groups.iter().map(|(_, g)| g.len()).max().unwrap_or(0)
    }
}

/// Multi-source BFS from the absorbing set over free agents. A partially
/// stubborn agent's path is its own edge to `u_j`; any other node's parent
/// is its smallest-index neighbor one hop closer.
pub fn shortest_path_forest(aug: &AugmentedGraph) -> Result<PathSet> {
    if aug.absorbers().is_empty() {
        return domain("no stubborn agents: the absorbing set is empty");
    }
    let nn = aug.n_nodes();
    let mut dist = vec![None; nn];
    let mut queue = VecDeque::new();
    for &a in aug.absorbers() {
        dist[a] = Some(0);
        queue.push_back(a);
    }
    while let Some(v) = queue.pop_front() {
        let d = dist[v].unwrap();
        for (u, _) in aug.neighbors(v) {
            if dist[u].is_none() && !aug.is_absorbing(u) {
                dist[u] = Some(d + 1);
                queue.push_back(u);
            }
        }
    }

    let mut parent = vec![None; nn];
    let free = aug.free_nodes().to_vec();
    for &i in &free {
        let d = dist[i].expect("connected graph reaches the absorbing set");
        if let Some(u) = aug.virtual_node(i) {
            parent[i] = Some(u);
            continue;
        }
        parent[i] = aug
            .neighbors(i)
            .into_iter()
            .map(|(u, _)| u)
            .filter(|&u| dist[u] == Some(d - 1))
            .min();
    }

    let mut paths = Vec::with_capacity(free.len());
    let mut weighted = Vec::with_capacity(free.len());
    let mut grouped: BTreeMap<usize, Vec<usize>> =
        aug.absorbers().iter().map(|&a| (a, Vec::new())).collect();
    for &i in &free {
        let mut path = vec![i];
        let mut len_w = 0.0;
        let mut v = i;
        while let Some(p) = parent[v] {
            len_w += 1.0 / aug.weight(v, p).unwrap();
            path.push(p);
            v = p;
        }
        let end = v;
        if !(aug.is_virtual(end) && aug.agent_of_virtual(end) == i) {
            grouped.get_mut(&end).unwrap().push(i);
        }
        paths.push(path);
        weighted.push(len_w);
    }

    Ok(PathSet {
        dist,
        parent,
        free,
        paths,
        weighted,
        groups: grouped.into_iter().collect(),
    })
}

/// Congestion maximum and the oriented edge attaining it (first in
/// lexicographic order on ties); `edge` is `None` when no path exists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Congestion {
    pub value: f64,
    pub edge: Option<(usize, usize)>,
}

#[derive(Default, Clone, Copy)]
struct Load {
    xi: f64,
    eta: f64,
    count: usize,
}

fn edge_loads(aug: &AugmentedGraph, paths: &PathSet) -> BTreeMap<(usize, usize), Load> {
    let mut loads: BTreeMap<(usize, usize), Load> = BTreeMap::new();
    for (k, &i) in paths.free().iter().enumerate() {
        let wi = aug.weighted_degree(i);
        let xi = wi * paths.weighted_len_at(k);
        let eta = wi * paths.hops_at(k) as f64;
        for e in paths.edges_at(k) {
            let l = loads.entry(e).or_default();
            l.xi += xi;
            l.eta += eta;
            l.count += 1;
        }
    }
    loads
}

fn argmax(it: impl Iterator<Item = ((usize, usize), f64)>) -> Congestion {
    let mut best = Congestion {
        value: 0.0,
        edge: None,
    };
    for (e, v) in it {
        if best.edge.is_none() || v > best.value {
            best = Congestion {
                value: v,
                edge: Some(e),
            };
        }
    }
    best
}

/// `ξ(x,y) = Σ_{i: γ_i ∋ (x,y)} w_i |γ_i|_w`, maximized over oriented edges.
pub fn xi_bound(aug: &AugmentedGraph, paths: &PathSet) -> Congestion {
    argmax(edge_loads(aug, paths).into_iter().map(|(e, l)| (e, l.xi)))
}

/// `η(x,y) = (1/w_xy) Σ_{i: γ_i ∋ (x,y)} w_i |γ_i|`, maximized over
/// oriented edges.
pub fn eta_bound(aug: &AugmentedGraph, paths: &PathSet) -> Congestion {
    argmax(
        edge_loads(aug, paths)
            .into_iter()
            .map(|(e, l)| (e, l.eta / aug.weight(e.0, e.1).unwrap())),
    )
}

/// `η(x,y)` on one oriented edge; zero when no path uses it.
pub fn eta_at(aug: &AugmentedGraph, paths: &PathSet, edge: (usize, usize)) -> f64 {
    edge_loads(aug, paths)
        .get(&edge)
        .map_or(0.0, |l| l.eta / aug.weight(edge.0, edge.1).unwrap())
}

/// `B`: largest number of paths through one social edge (either
/// orientation).
pub fn bottleneck(aug: &AugmentedGraph, paths: &PathSet) -> usize {
    let n = aug.n_agents();
    let mut per_edge: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for ((x, y), l) in edge_loads(aug, paths) {
        if x < n && y < n {
            *per_edge.entry((x.min(y), x.max(y))).or_default() += l.count;
        }
    }
    per_edge.values().copied().max().unwrap_or(0)
}
