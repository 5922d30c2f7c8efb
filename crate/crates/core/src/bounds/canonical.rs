use serde::Serialize;

use super::conductance::{conductance_lower, psi_free, ConductanceMode, ConductanceResult};
use super::paths::{bottleneck, eta_bound, shortest_path_forest, xi_bound, Congestion, PathSet};
use crate::error::Result;
use crate::graph::{AugmentedGraph, Graph, NodeRole, Stubbornness, StubbornnessProfile};
use crate::spectral::lambda_sub;

/// Which of the two canonical regimes bounds `η`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// A virtual edge `(j, u_j)` dominates: `K_min ≤ K*`.
    VirtualEdge,
    /// A social bottleneck edge dominates.
    Bottleneck,
}

/// Shortest-path quantities and the bounds built from them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Canonical {
    /// Largest strength among non-stubborn agents.
    pub d_tilde: f64,
    /// Largest strength among stubborn agents.
    pub d_hat: f64,
    pub k_min: Option<f64>,
    pub k_star: Option<f64>,
    /// `|γ|`.
    pub gamma_len: usize,
    /// `|Γ|`.
    pub gamma_group: usize,
    /// Bottleneck constant `B`.
    pub bottleneck: usize,
    /// `2(1 + (d̂ + |γ||Γ|d̃)/K_min)`.
    pub cong1: Option<f64>,
    /// `2|γ|B d̃`.
    pub cong2: f64,
    pub regime: Regime,
    /// Upper bound of the active regime, `max(cong1, cong2)`.
    pub upper: f64,
    /// `n δ d_max`.
    pub naive: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub xi: Congestion,
    pub eta: Congestion,
    #[serde(rename = "T_upper_xi")]
    pub t_upper_xi: f64,
    #[serde(rename = "T_upper_eta")]
    pub t_upper_eta: f64,
    pub conductance: ConductanceResult,
    #[serde(rename = "T_lower")]
    pub t_lower: f64,
    /// `ψ(𝒱∖𝒮_F)`.
    pub psi_free: f64,
    /// `1 + 2|ℰ|/Σ_{𝒮_P} K_j`; only without fully stubborn agents.
    pub lower_partial: Option<f64>,
    /// `(ΣK + 2|ℰ| − Σ_{𝒮_F} d_j)/(ΣK + Σ_{𝒮_F} d_j)`; only with fully
    /// stubborn agents.
    pub lower_full: Option<f64>,
    pub canonical: Canonical,
}

impl BoundReport {
    /// `min(2ξ, 2η)`.
    pub fn t_upper(&self) -> f64 {
        self.t_upper_xi.min(self.t_upper_eta)
    }
}

fn max_strength(g: &Graph, nodes: impl Iterator<Item = usize>) -> f64 {
    nodes.map(|i| g.strength(i)).fold(0.0, f64::max)
}

/// The canonical suite: `d̃`, `d̂`, `K_min`, `|γ|`, `|Γ|`, `B`, `K*`, the
/// two regime bounds and the naive bound.
pub fn canonical(aug: &AugmentedGraph, paths: &PathSet) -> Result<Canonical> {
    let g = aug.base();
    let profile = aug.profile();
    let d_tilde = max_strength(
        g,
        (0..g.n()).filter(|&i| profile.role(i) == NodeRole::NonStubborn),
    );
    let d_hat = max_strength(g, profile.stubborn().into_iter());
    let k_min = profile
        .partial()
        .iter()
        .map(|&j| profile.k(j))
        .reduce(f64::min);
    let gamma_len = paths.max_len();
    let gamma_group = paths.max_group();
    let b = bottleneck(aug, paths);

    let social = gamma_len as f64 * b as f64 * d_tilde;
    let numer = d_hat + gamma_len as f64 * gamma_group as f64 * d_tilde;
    let k_star = k_min.and_then(|_| (social > 1.0).then(|| numer / (social - 1.0)));
    let cong1 = k_min.map(|k| 2.0 * (1.0 + numer / k));
    let cong2 = 2.0 * social;
    let regime = match (k_min, k_star) {
        (Some(k), Some(ks)) if k > ks => Regime::Bottleneck,
        (Some(_), _) => Regime::VirtualEdge,
        (None, _) => Regime::Bottleneck,
    };
    let upper = cong1.map_or(cong2, |c| c.max(cong2));
    let naive = g.n() as f64 * g.diameter()? as f64 * g.max_degree() as f64;
    Ok(Canonical {
        d_tilde,
        d_hat,
        k_min,
        k_star,
        gamma_len,
        gamma_group,
        bottleneck: b,
        cong1,
        cong2,
        regime,
        upper,
        naive,
    })
}

/// All bounds for one instance from the given path set.
pub fn canonical_report(
    aug: &AugmentedGraph,
    paths: &PathSet,
    mode: ConductanceMode,
) -> Result<BoundReport> {
    let xi = xi_bound(aug, paths);
    let eta = eta_bound(aug, paths);
    let conductance = conductance_lower(aug, mode)?;
    let g = aug.base();
    let profile = aug.profile();
    let sum_k: f64 = profile.partial().iter().map(|&j| profile.k(j)).sum();
    let two_e = 2.0 * g.total_weight();
    let full = profile.full();
    let (lower_partial, lower_full) = if full.is_empty() {
        (Some(1.0 + two_e / sum_k), None)
    } else {
        let d_f: f64 = full.iter().map(|&j| g.strength(j)).sum();
        (None, Some((sum_k + two_e - d_f) / (sum_k + d_f)))
    };
    Ok(BoundReport {
        t_upper_xi: 2.0 * xi.value,
        t_upper_eta: 2.0 * eta.value,
        xi,
        eta,
        t_lower: conductance.t_lower,
        conductance,
        psi_free: psi_free(aug)?,
        lower_partial,
        lower_full,
        canonical: canonical(aug, paths)?,
    })
}

/// Shortest-path forest followed by [`canonical_report`].
pub fn bound_report(aug: &AugmentedGraph, mode: ConductanceMode) -> Result<BoundReport> {
    let paths = shortest_path_forest(aug)?;
    canonical_report(aug, &paths, mode)
}

/// Largest instance for which [`placement_score`] also computes `λ_A`.
pub const PLACEMENT_EXACT_LIMIT: usize = 500;

/// Metrics for ranking a placement of stubborn agents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacementScore {
    pub gamma_len: usize,
    pub bottleneck: usize,
    pub d_tilde: f64,
    /// `|γ| B d̃`.
    pub product: f64,
    /// `min(2ξ, 2η)`.
    pub t_upper: f64,
    pub t_exact: Option<f64>,
}

/// Places stubborn agents with the given levels on `candidates` and scores
/// the result.
pub fn placement_score(
    g: &Graph,
    candidates: &[usize],
    levels: &[Stubbornness],
) -> Result<PlacementScore> {
    if candidates.is_empty() || candidates.len() != levels.len() {
        return crate::error::param(
            "placement needs one level per candidate and at least one candidate",
        );
    }
    let entries: Vec<(usize, Stubbornness)> = candidates
        .iter()
        .copied()
        .zip(levels.iter().copied())
        .collect();
    let profile = StubbornnessProfile::with(g.n(), &entries)?;
    let aug = AugmentedGraph::build(g, &profile)?;
    let paths = shortest_path_forest(&aug)?;
    let c = canonical(&aug, &paths)?;
    let t_upper = 2.0
        * xi_bound(&aug, &paths)
            .value
            .min(eta_bound(&aug, &paths).value);
    let t_exact = if g.n() <= PLACEMENT_EXACT_LIMIT {
        Some(lambda_sub(&aug)?.t_exact)
    } else {
        None
    };
    Ok(PlacementScore {
        gamma_len: c.gamma_len,
        bottleneck: c.bottleneck,
        d_tilde: c.d_tilde,
        product: c.gamma_len as f64 * c.bottleneck as f64 * c.d_tilde,
        t_upper,
        t_exact,
    })
}
