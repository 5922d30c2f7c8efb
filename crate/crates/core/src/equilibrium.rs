//! Long-run opinions `x(∞)`.
//!
//! Three exact routes are kept deliberately separate in how they assemble
//! their linear systems:
//!
//! * [`solve_equilibrium`] builds the reduced update `x̃ ← Ãx̃ + B̃x_S(0)`
//!   straight from the best-response coefficients and solves
//!   `(I − Ã) x̃ = B̃ x_S(0)`;
//! * [`hitting_probabilities`] solves `F = B̃ + ÃF` one absorber column at a
//!   time from the random-walk transition probabilities on the augmented
//!   graph, then forms `F x_S(0)`;
//! * [`electrical_voltages`] applies Kirchhoff's current law on the
//!   augmented graph with the absorbers held at their source voltages.
//!
//! [`mc_hitting`] estimates `F` by simulating the absorbed walk.

use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg64Mcg;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::check_opinions;
use crate::error::{domain, param, Error, Result};
use crate::graph::{AugmentedGraph, Graph, NodeRole, StubbornnessProfile};
use crate::linalg::{conjugate_gradient, SymCsr};

/// Fixed-point residual every exact route must reach.
pub const SOLVER_TOLERANCE: f64 = 1e-12;
/// Pairwise agreement required between exact routes.
pub const AGREEMENT_TOLERANCE: f64 = 1e-9;
/// Hard cap on the length of a single Monte-Carlo walk.
pub const WALK_STEP_CAP: usize = 10_000_000;

const CG_TARGET: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Consensus,
    LinearSolve,
    HittingProbabilities,
    Electrical,
}

/// Absorption probabilities of the walk on the augmented graph.
///
/// Rows are the free agents (not fully stubborn), columns the stubborn
/// agents in ascending order; column `j` is absorption at `u_j` for a
/// partially stubborn `j` and at `j` itself for a fully stubborn one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingMatrix {
    pub free: Vec<usize>,
    pub stubborn: Vec<usize>,
    pub rows: Vec<Vec<f64>>,
}

impl HittingMatrix {
    /// Row of any agent; fully stubborn agents get the identity row.
    pub fn row(&self, agent: usize) -> Vec<f64> {
        match self.free.binary_search(&agent) {
            Ok(p) => self.rows[p].clone(),
            Err(_) => self
                .stubborn
                .iter()
                .map(|&j| if j == agent { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    /// `x_i(∞) = Σ_j F_ij x_j(0)` for every agent.
    pub fn combine(&self, x0: &[f64]) -> Vec<f64> {
        (0..x0.len())
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(&self.stubborn)
                    .map(|(f, &j)| f * x0[j])
                    .sum()
            })
            .collect()
    }

    /// `max_i |Σ_j F_ij − 1|`.
    pub fn row_sum_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumResult {
    pub x_inf: Vec<f64>,
    pub method: Method,
    pub hitting: Option<HittingMatrix>,
    /// [`fixed_point_residual`] of `x_inf`.
    pub residual: f64,
}

/// `max_i |x_i − (Σ_j w_ij x_j + K_i x0_i) / (d_i + K_i)|` over agents that
/// are not fully stubborn, plus `|x_i − x0_i|` on fully stubborn ones.
pub fn fixed_point_residual(
    g: &Graph,
    profile: &StubbornnessProfile,
    x0: &[f64],
    x: &[f64],
) -> f64 {
    (0..g.n())
        .map(|i| match profile.role(i) {
            NodeRole::Full => (x[i] - x0[i]).abs(),
            _ => {
                let k = profile.k(i);
                let pull: f64 = g.neighbors(i).iter().map(|&(j, w)| w * x[j]).sum();
                (x[i] - (pull + k * x0[i]) / (g.strength(i) + k)).abs()
            }
        })
        .fold(0.0, f64::max)
}

fn check_inputs(g: &Graph, profile: &StubbornnessProfile, x0: &[f64]) -> Result<()> {
    if profile.len() != g.n() || x0.len() != g.n() {
        return param("opinion and profile lengths must equal the number of agents");
    }
    check_opinions(x0)?;
    g.require_connected()
}

/// Common limit without stubborn agents: `Σ_j d_j x_j(0) / 2|E|`.
pub fn consensus_value(g: &Graph, profile: &StubbornnessProfile, x0: &[f64]) -> Result<f64> {
    check_inputs(g, profile, x0)?;
    if profile.has_stubborn() {
        return domain("consensus value is defined only without stubborn agents");
    }
    let total = 2.0 * g.total_weight();
    Ok((0..g.n()).map(|i| g.strength(i) * x0[i]).sum::<f64>() / total)
}

/// Consensus limit wrapped as an [`EquilibriumResult`].
pub fn consensus_equilibrium(
    g: &Graph,
    profile: &StubbornnessProfile,
    x0: &[f64],
) -> Result<EquilibriumResult> {
    let c = consensus_value(g, profile, x0)?;
    let x_inf = vec![c; g.n()];
    let residual = fixed_point_residual(g, profile, x0, &x_inf);
    Ok(EquilibriumResult {
        x_inf,
        method: Method::Consensus,
        hitting: None,
        residual,
    })
}

/// Solves `(I − Ã) x̃ = B̃ x_S(0)` through its `π̃`-symmetrized form
/// `D^{1/2}(I − Ã)D^{−1/2}` with conjugate gradient; fully stubborn agents
/// are Dirichlet data and never enter the unknowns.
pub fn solve_equilibrium(
    g: &Graph,
    profile: &StubbornnessProfile,
    x0: &[f64],
) -> Result<EquilibriumResult> {
    check_inputs(g, profile, x0)?;
    if !profile.has_stubborn() {
        return domain("no stubborn agents; the limit is the consensus value");
    }
    let n = g.n();
    let unknowns: Vec<usize> = (0..n)
        .filter(|&i| profile.role(i) != NodeRole::Full)
        .collect();
    let mut pos = vec![usize::MAX; n];
    for (p, &i) in unknowns.iter().enumerate() {
        pos[i] = p;
    }
    // Row i of the best-response map: A_ij = w_ij/(d_i+K_i), B_ii = K_i/(d_i+K_i).
    let denom: Vec<f64> = unknowns
        .iter()
        .map(|&i| g.strength(i) + profile.k(i))
        .collect();
    let mut rhs = vec![0.0; unknowns.len()];
    let mut rows = Vec::with_capacity(unknowns.len());
    for (a, &i) in unknowns.iter().enumerate() {
        let mut b = profile.k(i) * x0[i] / denom[a];
        let mut row = vec![(a, 1.0)];
        for &(j, w) in g.neighbors(i) {
            let coeff = w / denom[a];
            if profile.role(j) == NodeRole::Full {
                b += coeff * x0[j];
            } else {
                let c = pos[j];
                // D^{1/2} A D^{-1/2}: (w/denom_a) * sqrt(denom_a / denom_c)
                row.push((c, -coeff * (denom[a] / denom[c]).sqrt()));
            }
        }
        rhs[a] = b * denom[a].sqrt();
        rows.push(row);
    }
    let op = SymCsr::from_rows(rows);
    let out = conjugate_gradient(&op, &rhs, CG_TARGET);
    let mut x_inf = x0.to_vec();
    for (a, &i) in unknowns.iter().enumerate() {
        x_inf[i] = out.x[a] / denom[a].sqrt();
    }
    finish(
        g,
        profile,
        x0,
        x_inf,
        Method::LinearSolve,
        None,
        out.iterations,
    )
}

fn finish(
    g: &Graph,
    profile: &StubbornnessProfile,
    x0: &[f64],
    x_inf: Vec<f64>,
    method: Method,
    hitting: Option<HittingMatrix>,
    iterations: usize,
) -> Result<EquilibriumResult> {
    let residual = fixed_point_residual(g, profile, x0, &x_inf);
    if !(residual <= SOLVER_TOLERANCE) {
        return Err(Error::NotConverged {
            method: "conjugate gradient",
            iterations,
            residual,
        });
    }
    Ok(EquilibriumResult {
        x_inf,
        method,
        hitting,
        residual,
    })
}

/// Reduced walk operator on the free agents in symmetric form
/// `P*_ab = w_ab / sqrt(w_a w_b)`; returns `I − P*`.
fn reduced_walk_operator(aug: &AugmentedGraph) -> SymCsr {
    let free = aug.free_nodes();
    let rows = free
        .iter()
        .enumerate()
        .map(|(a, &i)| {
            let wi = aug.weighted_degree(i);
            let mut row = vec![(a, 1.0)];
            for (j, w) in aug.neighbors(i) {
                if let Some(c) = (!aug.is_absorbing(j)).then(|| aug.free_index(j)).flatten() {
                    row.push((c, -w / (wi * aug.weighted_degree(j)).sqrt()));
                }
            }
            row
        })
        .collect();
    SymCsr::from_rows(rows)
}

/// Solves `F = B̃ + ÃF` column by column, `P_ij = w_ij / w_i` on the
/// augmented graph.
pub fn hitting_probabilities(aug: &AugmentedGraph) -> Result<HittingMatrix> {
    let stubborn = aug.stubborn();
    if stubborn.is_empty() {
        return domain("absorbing set is empty");
    }
    let free = aug.free_nodes().to_vec();
    let op = reduced_walk_operator(aug);
    let sqrt_w: Vec<f64> = free
        .iter()
        .map(|&i| aug.weighted_degree(i).sqrt())
        .collect();
    let mut rows = vec![vec![0.0; stubborn.len()]; free.len()];
    for (c, &j) in stubborn.iter().enumerate() {
        let target = aug.absorber_of(j).unwrap();
        // B̃ column: one-step absorption probability into `target`, scaled by sqrt(w_i).
        let rhs: Vec<f64> = free
            .iter()
            .zip(&sqrt_w)
            .map(|(&i, s)| {
                aug.weight(i, target)
                    .map_or(0.0, |w| w / aug.weighted_degree(i))
                    * s
            })
            .collect();
        let out = conjugate_gradient(&op, &rhs, CG_TARGET);
        for (a, s) in sqrt_w.iter().enumerate() {
            rows[a][c] = out.x[a] / s;
        }
        let residual = column_residual(aug, &free, &rows, c, target);
        if !(residual <= SOLVER_TOLERANCE) {
            return Err(Error::NotConverged {
                method: "hitting-probability column solve",
                iterations: out.iterations,
                residual,
            });
        }
    }
    Ok(HittingMatrix {
        free,
        stubborn,
        rows,
    })
}

/// `max_i |F_ic − B̃_ic − Σ_k Ã_ik F_kc|`.
fn column_residual(
    aug: &AugmentedGraph,
    free: &[usize],
    rows: &[Vec<f64>],
    c: usize,
    target: usize,
) -> f64 {
    free.iter()
        .enumerate()
        .map(|(a, &i)| {
            let wi = aug.weighted_degree(i);
            let mut rhs = 0.0;
            for (j, w) in aug.neighbors(i) {
                if j == target {
                    rhs += w / wi;
                } else if let Some(k) = (!aug.is_absorbing(j)).then(|| aug.free_index(j)).flatten()
                {
                    rhs += w / wi * rows[k][c];
                }
            }
            (rows[a][c] - rhs).abs()
        })
        .fold(0.0, f64::max)
}

/// Equilibrium via `x(∞) = F x_S(0)`.
pub fn hitting_equilibrium(
    g: &Graph,
    profile: &StubbornnessProfile,
    x0: &[f64],
) -> Result<EquilibriumResult> {
    check_inputs(g, profile, x0)?;
    if !profile.has_stubborn() {
        return domain("no stubborn agents; the limit is the consensus value");
    }
    let aug = AugmentedGraph::build(g, profile)?;
    let f = hitting_probabilities(&aug)?;
    let x_inf = f.combine(x0);
    let residual = fixed_point_residual(g, profile, x0, &x_inf);
    if !(residual <= SOLVER_TOLERANCE * 10.0) {
        return Err(Error::NotConverged {
            method: "hitting-probability superposition",
            iterations: 0,
            residual,
        });
    }
    Ok(EquilibriumResult {
        x_inf,
        method: Method::HittingProbabilities,
        hitting: Some(f),
        residual,
    })
}

/// Node voltages when every edge of the augmented graph is a conductance
/// `w_ij`, each `u_j` is a source at `x_j(0)` behind its edge of
/// conductance `K_j`, and each fully stubborn agent is an ideal source.
pub fn electrical_voltages(
    g: &Graph,
    profile: &StubbornnessProfile,
    x0: &[f64],
) -> Result<EquilibriumResult> {
    check_inputs(g, profile, x0)?;
    if !profile.has_stubborn() {
        return domain("no voltage sources: no stubborn agents");
    }
    let aug = AugmentedGraph::build(g, profile)?;
    let total = aug.n_nodes();
    // Source voltages on the absorbing nodes.
    let mut source = vec![None; total];
    for &s in aug.absorbers() {
        source[s] = Some(x0[aug.stubborn_of_absorber(s)]);
    }
    let mut unknown = vec![usize::MAX; total];
    let nodes: Vec<usize> = (0..total).filter(|&v| source[v].is_none()).collect();
    for (p, &v) in nodes.iter().enumerate() {
        unknown[v] = p;
    }
    // Kirchhoff: Σ_j w_ij (v_i − v_j) = 0 at every non-source node.
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nodes.len()];
    let mut injected = vec![0.0; nodes.len()];
    for (a, b, w) in aug.edges() {
        for (p, q) in [(a, b), (b, a)] {
            if source[p].is_some() {
                continue;
            }
            let r = unknown[p];
            rows[r].push((r, w));
            match source[q] {
                Some(v) => injected[r] += w * v,
                None => rows[r].push((unknown[q], -w)),
            }
        }
    }
    let lap = SymCsr::from_rows(rows);
    let out = conjugate_gradient(&lap, &injected, CG_TARGET);
    let mut x_inf = x0.to_vec();
    for (p, &v) in nodes.iter().enumerate() {
        x_inf[v] = out.x[p];
    }
    finish(
        g,
        profile,
        x0,
        x_inf,
        Method::Electrical,
        None,
        out.iterations,
    )
}

/// All exact routes side by side.
#[derive(Debug, Clone, Serialize)]
pub struct CrossValidation {
    pub linear: EquilibriumResult,
    pub hitting: EquilibriumResult,
    pub electrical: EquilibriumResult,
    /// Largest pairwise `‖·‖_∞` gap among the three.
    pub max_deviation: f64,
}

impl CrossValidation {
    pub fn agrees(&self) -> bool {
        self.max_deviation <= AGREEMENT_TOLERANCE
    }
}

pub fn cross_validate(
    g: &Graph,
    profile: &StubbornnessProfile,
    x0: &[f64],
) -> Result<CrossValidation> {
    let linear = solve_equilibrium(g, profile, x0)?;
    let hitting = hitting_equilibrium(g, profile, x0)?;
    let electrical = electrical_voltages(g, profile, x0)?;
    let gap = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    let max_deviation = gap(&linear.x_inf, &hitting.x_inf)
        .max(gap(&linear.x_inf, &electrical.x_inf))
        .max(gap(&hitting.x_inf, &electrical.x_inf));
    Ok(CrossValidation {
        linear,
        hitting,
        electrical,
        max_deviation,
    })
}

/// Monte-Carlo estimate of `F` with binomial standard errors.
#[derive(Debug, Clone, Serialize)]
pub struct McHitting {
    pub estimate: HittingMatrix,
    pub std_err: Vec<Vec<f64>>,
    pub walks_per_node: usize,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of walk `walk` from `node`: the base seed XOR a hash of the pair.
pub fn walk_seed(seed: u64, node: usize, walk: usize) -> u64 {
    seed ^ splitmix(splitmix(node as u64) ^ walk as u64)
}

/// Simulates `walks_per_node` absorbed walks from every free agent with
/// `P_ij = w_ij / w_i`. Each walk is seeded independently so the result
/// does not depend on scheduling.
pub fn mc_hitting(aug: &AugmentedGraph, walks_per_node: usize, seed: u64) -> Result<McHitting> {
    if walks_per_node == 0 {
        return param("walks_per_node must be at least 1");
    }
    let stubborn = aug.stubborn();
    if stubborn.is_empty() {
        return domain("absorbing set is empty");
    }
    let total = aug.n_nodes();
    let mut column_of = vec![usize::MAX; total];
    for (c, &j) in stubborn.iter().enumerate() {
        column_of[aug.absorber_of(j).unwrap()] = c;
    }
    // cumulative transition tables
    let tables: Vec<(Vec<usize>, Vec<f64>)> = (0..total)
        .map(|v| {
            let nb = aug.neighbors(v);
            let mut acc = 0.0;
            let cum = nb
                .iter()
                .map(|&(_, w)| {
                    acc += w;
                    acc
                })
                .collect();
            (nb.into_iter().map(|(j, _)| j).collect(), cum)
        })
        .collect();
    let absorbing: Vec<bool> = (0..total).map(|v| aug.is_absorbing(v)).collect();
    let free = aug.free_nodes().to_vec();

    let counts: Vec<Vec<usize>> = free
        .par_iter()
        .map(|&start| {
            let mut hits = vec![0usize; stubborn.len()];
            for walk in 0..walks_per_node {
                let mut rng = Pcg64Mcg::seed_from_u64(walk_seed(seed, start, walk));
                let mut at = start;
                let mut steps = 0;
                while !absorbing[at] {
                    if steps >= WALK_STEP_CAP {
                        return Err(Error::WalkCapExceeded {
                            start,
                            cap: WALK_STEP_CAP,
                        });
                    }
                    let (nb, cum) = &tables[at];
                    let u = rng.random::<f64>() * cum[cum.len() - 1];
                    let k = cum.partition_point(|&c| c <= u).min(nb.len() - 1);
                    at = nb[k];
                    steps += 1;
                }
                hits[column_of[at]] += 1;
            }
            Ok(hits)
        })
        .collect::<Result<_>>()?;

    let nw = walks_per_node as f64;
    let rows: Vec<Vec<f64>> = counts
        .iter()
        .map(|h| h.iter().map(|&c| c as f64 / nw).collect())
        .collect();
    let std_err = rows
        .iter()
        .map(|r| r.iter().map(|&p| (p * (1.0 - p) / nw).sqrt()).collect())
        .collect();
    Ok(McHitting {
        estimate: HittingMatrix {
            free,
            stubborn,
            rows,
        },
        std_err,
        walks_per_node,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{run, DynamicsConfig};
    use crate::graph::{generate, GraphKind, Stubbornness};
    use Stubbornness::{Finite, Full};

    fn line(n: usize) -> Graph {
        generate(&GraphKind::Line { n }, None).unwrap()
    }

    #[test]
    fn consensus_on_star_and_regular_graphs() {
        let star = generate(&GraphKind::Star { n: 4 }, None).unwrap();
        let x0 = [1.0, 0.0, 0.0, 0.0];
        let c = consensus_value(&star, &StubbornnessProfile::none(4), &x0).unwrap();
        assert!((c - 0.5).abs() < 1e-15);
        // iterate the (periodic) star with self-confidence to its limit
        let cfg = DynamicsConfig {
            epsilon: 0.3,
            nu: 1e-14,
            ..Default::default()
        };
        let t = run(&star, &StubbornnessProfile::none(4), &x0, &cfg, None).unwrap();
        assert!(t.last().iter().all(|v| (v - 0.5).abs() < 1e-12));

        let ring = generate(&GraphKind::Ring { n: 8 }, None).unwrap();
        let x0 = [0.1, 0.9, 0.4, 0.3, 0.8, 0.2, 0.6, 0.5];
        let c = consensus_value(&ring, &StubbornnessProfile::none(8), &x0).unwrap();
        assert!((c - x0.iter().sum::<f64>() / 8.0).abs() < 1e-15);
    }

    #[test]
    fn consensus_rejects_stubborn_profiles() {
        let g = line(3);
        let p = StubbornnessProfile::with(3, &[(0, Finite(1.0))]).unwrap();
        assert!(matches!(
            consensus_value(&g, &p, &[0.0; 3]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            solve_equilibrium(&g, &StubbornnessProfile::none(3), &[0.0; 3]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn single_stubborn_agent_fixes_everyone() {
        let g = generate(&GraphKind::Grid { side: 5 }, None).unwrap();
        for level in [Finite(0.3), Full] {
            let p = StubbornnessProfile::with(25, &[(12, level)]).unwrap();
            let mut x0: Vec<f64> = (0..25).map(|i| (i as f64 * 0.13).fract()).collect();
            x0[12] = 0.7;
            let r = solve_equilibrium(&g, &p, &x0).unwrap();
            assert!(r.x_inf.iter().all(|v| (v - 0.7).abs() < 1e-10));
        }
    }

    #[test]
    fn line3_with_two_partial_ends() {
        let g = line(3);
        let p = StubbornnessProfile::with(3, &[(0, Finite(1.0)), (2, Finite(1.0))]).unwrap();
        let x0 = [1.0, 0.3, 0.0];
        for r in [
            solve_equilibrium(&g, &p, &x0).unwrap(),
            electrical_voltages(&g, &p, &x0).unwrap(),
            hitting_equilibrium(&g, &p, &x0).unwrap(),
        ] {
            for (a, b) in r.x_inf.iter().zip([0.75, 0.5, 0.25]) {
                assert!((a - b).abs() < 1e-12, "{:?}", r.method);
            }
        }
    }

    // Path 1–2–3, agent 1 partial with K = 2 at opinion 1, agent 3 fully
    // stubborn at 0. By hand: x1 = (x2 + 2)/3, x2 = x1/2 ⇒ x1 = 0.8, x2 = 0.4.
    fn mixed_path() -> (Graph, StubbornnessProfile, [f64; 3]) {
        let g = line(3);
        let p = StubbornnessProfile::with(3, &[(0, Finite(2.0)), (2, Full)]).unwrap();
        (g, p, [1.0, 0.5, 0.0])
    }

    #[test]
    fn mixed_partial_and_full_path() {
        let (g, p, x0) = mixed_path();
        let r = solve_equilibrium(&g, &p, &x0).unwrap();
        for (a, b) in r.x_inf.iter().zip([0.8, 0.4, 0.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let aug = AugmentedGraph::build(&g, &p).unwrap();
        let f = hitting_probabilities(&aug).unwrap();
        assert_eq!(f.stubborn, vec![0, 2]);
        // row of agent 2 (index 1): absorbed at u_1 w.p. 0.4
        assert!((f.row(1)[0] - 0.4).abs() < 1e-12);
        assert!((f.row(1)[1] - 0.6).abs() < 1e-12);
        assert_eq!(f.row(2), vec![0.0, 1.0]);
    }

    #[test]
    fn gamblers_ruin_midpoint() {
        let g = line(3);
        let p = StubbornnessProfile::with(3, &[(0, Full), (2, Full)]).unwrap();
        let aug = AugmentedGraph::build(&g, &p).unwrap();
        let f = hitting_probabilities(&aug).unwrap();
        assert_eq!(f.free, vec![1]);
        assert!((f.rows[0][0] - 0.5).abs() < 1e-14);
        assert!((f.rows[0][1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn stronger_stubbornness_keeps_the_walk_home() {
        let g = generate(&GraphKind::Ring { n: 7 }, None).unwrap();
        let mut prev = 0.0;
        for k in [0.01, 0.1, 1.0, 10.0, 100.0, 1e4] {
            let p = StubbornnessProfile::with(7, &[(0, Finite(k)), (3, Full)]).unwrap();
            let aug = AugmentedGraph::build(&g, &p).unwrap();
            let f = hitting_probabilities(&aug).unwrap();
            let own = f.row(0)[0];
            assert!(own > prev);
            prev = own;
        }
        assert!(prev > 0.999);
    }

    #[test]
    fn hitting_requires_an_absorber() {
        let g = line(3);
        let aug = AugmentedGraph::build(&g, &StubbornnessProfile::none(3)).unwrap();
        assert!(matches!(hitting_probabilities(&aug), Err(Error::Domain(_))));
        assert!(mc_hitting(&aug, 10, 1).is_err());
    }

    #[test]
    fn equal_sources_give_constant_voltage() {
        let g = generate(&GraphKind::Grid { side: 4 }, None).unwrap();
        let p = StubbornnessProfile::with(16, &[(0, Finite(0.5)), (15, Full), (6, Finite(3.0))])
            .unwrap();
        let mut x0 = vec![0.1; 16];
        for j in [0, 15, 6] {
            x0[j] = 0.35;
        }
        let r = electrical_voltages(&g, &p, &x0).unwrap();
        assert!(r.x_inf.iter().all(|v| (v - 0.35).abs() < 1e-12));
    }

    #[test]
    fn monte_carlo_symmetric_and_degenerate_cases() {
        let g = line(3);
        let p = StubbornnessProfile::with(3, &[(0, Full), (2, Full)]).unwrap();
        let aug = AugmentedGraph::build(&g, &p).unwrap();
        let mc = mc_hitting(&aug, 100_000, 9).unwrap();
        let se = (0.25f64 / 1e5).sqrt();
        assert!((mc.estimate.rows[0][0] - 0.5).abs() <= 3.0 * se);

        let star = generate(&GraphKind::Star { n: 5 }, None).unwrap();
        let p = StubbornnessProfile::with(5, &[(2, Finite(1.0))]).unwrap();
        let aug = AugmentedGraph::build(&star, &p).unwrap();
        let mc = mc_hitting(&aug, 50, 3).unwrap();
        for (r, s) in mc.estimate.rows.iter().zip(&mc.std_err) {
            assert_eq!(r, &vec![1.0]);
            assert_eq!(s, &vec![0.0]);
        }
    }

    #[test]
    fn monte_carlo_matches_the_mixed_path() {
        let (g, p, _) = mixed_path();
        let aug = AugmentedGraph::build(&g, &p).unwrap();
        let mc = mc_hitting(&aug, 100_000, 21).unwrap();
        let se = (0.4f64 * 0.6 / 1e5).sqrt();
        // free agents are 0 and 1; agent 1 sits at index 1
        assert!((mc.estimate.rows[1][0] - 0.4).abs() <= 3.0 * se);
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let (g, p, _) = mixed_path();
        let aug = AugmentedGraph::build(&g, &p).unwrap();
        let a = mc_hitting(&aug, 500, 4).unwrap();
        let b = mc_hitting(&aug, 500, 4).unwrap();
        assert_eq!(a.estimate, b.estimate);
    }

    #[test]
    fn maximum_principle_and_k_monotonicity() {
        let g = generate(&GraphKind::Grid { side: 4 }, None).unwrap();
        let x0: Vec<f64> = (0..16)
            .map(|i| {
                if i == 0 {
                    1.0
                } else if i == 15 {
                    0.0
                } else {
                    0.5
                }
            })
            .collect();
        let mut prev: Option<Vec<f64>> = None;
        for k in [0.1, 0.5, 1.0, 5.0, 50.0] {
            let p = StubbornnessProfile::with(16, &[(0, Finite(k)), (15, Full)]).unwrap();
            let r = solve_equilibrium(&g, &p, &x0).unwrap();
            for i in 1..15 {
                assert!(r.x_inf[i] > 0.0 && r.x_inf[i] < 1.0);
            }
            if let Some(prev) = &prev {
                // raising K_1 moves everyone toward x0_1 = 1
                assert!(r.x_inf.iter().zip(prev).all(|(a, b)| *a >= *b - 1e-15));
            }
            prev = Some(r.x_inf);
        }
    }
}
