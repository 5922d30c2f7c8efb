use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{param, Result};

/// Stubbornness of one agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Stubbornness {
    /// Finite pull `K ≥ 0` toward the initial opinion; `K = 0` is a
    /// non-stubborn agent.
    Finite(f64),
    /// Never moves from its initial opinion.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeRole {
    NonStubborn,
    Partial,
    Full,
}

/// Per-agent stubbornness levels.
#[derive(Debug, Clone, PartialEq)]
pub struct StubbornnessProfile {
    levels: Vec<Stubbornness>,
}

impl StubbornnessProfile {
    pub fn new(levels: Vec<Stubbornness>) -> Result<Self> {
        for (i, l) in levels.iter().enumerate() {
            if let Stubbornness::Finite(k) = *l {
                if !(k.is_finite() && k >= 0.0) {
                    return param(format!("agent {i} has invalid stubbornness {k}"));
                }
            }
        }
        Ok(StubbornnessProfile { levels })
    }

    /// Nobody is stubborn.
    pub fn none(n: usize) -> Self {
        StubbornnessProfile {
            levels: vec![Stubbornness::Finite(0.0); n],
        }
    }

    /// Non-stubborn everywhere except the listed agents.
    pub fn with(n: usize, entries: &[(usize, Stubbornness)]) -> Result<Self> {
        let mut levels = vec![Stubbornness::Finite(0.0); n];
        for &(i, l) in entries {
            if i >= n {
                return param(format!("agent {i} out of range for n = {n}"));
            }
            levels[i] = l;
        }
        Self::new(levels)
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, i: usize) -> Stubbornness {
        self.levels[i]
    }

    pub fn levels(&self) -> &[Stubbornness] {
        &self.levels
    }

    pub fn role(&self, i: usize) -> NodeRole {
        match self.levels[i] {
            Stubbornness::Full => NodeRole::Full,
            Stubbornness::Finite(k) if k > 0.0 => NodeRole::Partial,
            Stubbornness::Finite(_) => NodeRole::NonStubborn,
        }
    }

    /// `K_i`, with `∞` for fully stubborn agents.
    pub fn k(&self, i: usize) -> f64 {
        match self.levels[i] {
            Stubbornness::Full => f64::INFINITY,
            Stubbornness::Finite(k) => k,
        }
    }

    fn with_role(&self, role: NodeRole) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.role(i) == role).collect()
    }

    /// All stubborn agents, ascending.
    pub fn stubborn(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.role(i) != NodeRole::NonStubborn)
            .collect()
    }

    pub fn partial(&self) -> Vec<usize> {
        self.with_role(NodeRole::Partial)
    }

    pub fn full(&self) -> Vec<usize> {
        self.with_role(NodeRole::Full)
    }

    pub fn has_stubborn(&self) -> bool {
        (0..self.len()).any(|i| self.role(i) != NodeRole::NonStubborn)
    }
}

/// The social graph plus one absorbing virtual node `u_i` per partially
/// stubborn agent, attached by an edge of weight `K_i`.
///
/// Node indices: agents keep `0..n`; the virtual node of the `p`-th
/// partially stubborn agent (ascending order) is `n + p`.
#[derive(Debug, Clone)]
pub struct AugmentedGraph<'g> {
    base: &'g Graph,
    profile: StubbornnessProfile,
    partial: Vec<usize>,
    virtual_of: Vec<Option<usize>>,
    weights: Vec<f64>,
    free: Vec<usize>,
    free_pos: Vec<Option<usize>>,
    absorbers: Vec<usize>,
}

impl<'g> AugmentedGraph<'g> {
    pub fn build(g: &'g Graph, profile: &StubbornnessProfile) -> Result<Self> {
        if profile.len() != g.n() {
            return param(format!(
                "profile has {} entries for {} agents",
                profile.len(),
                g.n()
            ));
        }
        g.require_connected()?;
        let n = g.n();
        let partial = profile.partial();
        let mut virtual_of = vec![None; n];
        let mut weights: Vec<f64> = (0..n).map(|i| g.strength(i)).collect();
        for (p, &i) in partial.iter().enumerate() {
            virtual_of[i] = Some(n + p);
            weights[i] += profile.k(i);
        }
        weights.extend(partial.iter().map(|&i| profile.k(i)));

        let free: Vec<usize> = (0..n)
            .filter(|&i| profile.role(i) != NodeRole::Full)
            .collect();
        let mut free_pos = vec![None; n];
        for (p, &i) in free.iter().enumerate() {
            free_pos[i] = Some(p);
        }
        let mut absorbers = profile.full();
        absorbers.extend(n..n + partial.len());

        Ok(AugmentedGraph {
            base: g,
            profile: profile.clone(),
            partial,
            virtual_of,
            weights,
            free,
            free_pos,
            absorbers,
        })
    }

    pub fn base(&self) -> &'g Graph {
        self.base
    }

    pub fn profile(&self) -> &StubbornnessProfile {
        &self.profile
    }

    pub fn n_agents(&self) -> usize {
        self.base.n()
    }

    /// Agents plus virtual nodes.
    pub fn n_nodes(&self) -> usize {
        self.weights.len()
    }

    pub fn num_virtual(&self) -> usize {
        self.partial.len()
    }

    pub fn is_virtual(&self, node: usize) -> bool {
        node >= self.n_agents()
    }

    pub fn virtual_node(&self, agent: usize) -> Option<usize> {
        self.virtual_of[agent]
    }

    /// The partially stubborn agent a virtual node hangs off.
    pub fn agent_of_virtual(&self, node: usize) -> usize {
        self.partial[node - self.n_agents()]
    }

    /// Weighted degree `w_i`: `d_i + K_i` on partial agents, `d_i` on other
    /// agents, `K_j` on `u_j`.
    pub fn weighted_degree(&self, node: usize) -> f64 {
        self.weights[node]
    }

    pub fn weighted_degrees(&self) -> &[f64] {
        &self.weights
    }

    /// `Z = Σ w_i` over every augmented node.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `π̃`: weighted degrees normalized over the free agents, indexed like
    /// [`Self::free_nodes`].
    pub fn free_stationary(&self) -> Vec<f64> {
        let total: f64 = self.free.iter().map(|&i| self.weights[i]).sum();
        self.free.iter().map(|&i| self.weights[i] / total).collect()
    }

    /// Agents that are not fully stubborn, ascending.
    pub fn free_nodes(&self) -> &[usize] {
        &self.free
    }

    /// Position of an agent within [`Self::free_nodes`]; `None` for fully
    /// stubborn agents and virtual nodes.
    pub fn free_index(&self, agent: usize) -> Option<usize> {
        self.free_pos.get(agent).copied().flatten()
    }

    /// Fully stubborn agents followed by virtual nodes; ascending.
    pub fn absorbers(&self) -> &[usize] {
        &self.absorbers
    }

    pub fn is_absorbing(&self, node: usize) -> bool {
        if self.is_virtual(node) {
            true
        } else {
            self.profile.role(node) == NodeRole::Full
        }
    }

    /// Stubborn agents, ascending. Column order of hitting matrices.
    pub fn stubborn(&self) -> Vec<usize> {
        self.profile.stubborn()
    }

    /// The absorbing node standing for stubborn agent `j`.
    pub fn absorber_of(&self, j: usize) -> Option<usize> {
        match self.profile.role(j) {
            NodeRole::Full => Some(j),
            NodeRole::Partial => self.virtual_of[j],
            NodeRole::NonStubborn => None,
        }
    }

    /// Stubborn agent represented by an absorbing node.
    pub fn stubborn_of_absorber(&self, node: usize) -> usize {
        if self.is_virtual(node) {
            self.agent_of_virtual(node)
        } else {
            node
        }
    }

    /// Edge weight between two augmented nodes.
    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        match (self.is_virtual(a), self.is_virtual(b)) {
            (false, false) => self.base.weight(a, b),
            (true, true) => None,
            (true, false) => (self.agent_of_virtual(a) == b).then(|| self.weights[a]),
            (false, true) => (self.agent_of_virtual(b) == a).then(|| self.weights[b]),
        }
    }

    /// Neighbors of an augmented node with weights, ascending.
    pub fn neighbors(&self, node: usize) -> Vec<(usize, f64)> {
        if self.is_virtual(node) {
            return vec![(self.agent_of_virtual(node), self.weights[node])];
        }
        let mut out = self.base.neighbors(node).to_vec();
        if let Some(u) = self.virtual_of[node] {
            out.push((u, self.weights[u]));
        }
        out
    }

    /// Undirected edges `(a, b, w)` with `a < b`: social edges then
    /// virtual edges.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = self.base.edges().to_vec();
        let n = self.n_agents();
        out.extend(
            self.partial
                .iter()
                .enumerate()
                .map(|(p, &i)| (i, n + p, self.weights[n + p])),
        );
        out
    }
}

/// Alias for [`AugmentedGraph::build`].
pub fn build_augmented<'g>(
    g: &'g Graph,
    profile: &StubbornnessProfile,
) -> Result<AugmentedGraph<'g>> {
    AugmentedGraph::build(g, profile)
}
