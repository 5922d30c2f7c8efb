use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::graph::AugmentedGraph;

/// Largest free set exact enumeration accepts.
pub const EXACT_CAP: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConductanceMode {
    /// Every connected subset of the free agents.
    Exact,
    /// The free set and the free set minus each stubborn-adjacent agent.
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConductanceResult {
    pub psi_min: f64,
    /// Minimizing set, ascending agent indices.
    pub set: Vec<usize>,
    /// `1/ψ_min`.
    pub t_lower: f64,
    pub mode: ConductanceMode,
}

/// `ψ(B; Ĝ) = (Σ_{i∈B, j∉B} w_ij) / (Σ_{i∈B} w_i)` for a set of agents.
pub fn psi(aug: &AugmentedGraph, set: &[usize]) -> f64 {
    let mut inside = vec![false; aug.n_nodes()];
    for &i in set {
        inside[i] = true;
    }
    let mut cut = 0.0;
    let mut vol = 0.0;
    for &i in set {
        vol += aug.weighted_degree(i);
        cut += aug
            .neighbors(i)
            .into_iter()
            .filter(|&(j, _)| !inside[j])
            .map(|(_, w)| w)
            .sum::<f64>();
    }
    cut / vol
}

/// `ψ(𝒱∖𝒮_F)`.
pub fn psi_free(aug: &AugmentedGraph) -> Result<f64> {
    if aug.free_nodes().is_empty() {
        return domain("every agent is fully stubborn");
    }
    Ok(psi(aug, aug.free_nodes()))
}

fn better(a: &(f64, Vec<usize>), b: &(f64, Vec<usize>)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1))
}

/// Minimum of `ψ` over candidate sets of free agents; `T_lower = 1/ψ_min`.
pub fn conductance_lower(aug: &AugmentedGraph, mode: ConductanceMode) -> Result<ConductanceResult> {
    if aug.absorbers().is_empty() {
        return domain("no stubborn agents: the absorbing set is empty");
    }
    let free = aug.free_nodes();
    if free.is_empty() {
        return domain("every agent is fully stubborn");
    }
    let (psi_min, set) = match mode {
        ConductanceMode::Exact => exact(aug)?,
        ConductanceMode::Heuristic => heuristic(aug),
    };
    Ok(ConductanceResult {
        psi_min,
        set,
        t_lower: 1.0 / psi_min,
        mode,
    })
}

fn heuristic(aug: &AugmentedGraph) -> (f64, Vec<usize>) {
    let free = aug.free_nodes();
    let g = aug.base();
    let mut best = (psi(aug, free), free.to_vec());
    for &v in free {
        let stubborn_adjacent = aug.virtual_node(v).is_some()
            || g.neighbors(v).iter().any(|&(j, _)| aug.is_absorbing(j));
        if !stubborn_adjacent || free.len() == 1 {
            continue;
        }
        let set: Vec<usize> = free.iter().copied().filter(|&i| i != v).collect();
        let cand = (psi(aug, &set), set);
        if better(&cand, &best) == Ordering::Less {
            best = cand;
        }
    }
    best
}

/// Enumerates bitmasks over the free agents; only masks inducing a
/// connected subgraph of the free agents are scored.
fn exact(aug: &AugmentedGraph) -> Result<(f64, Vec<usize>)> {
    let free = aug.free_nodes();
    let m = free.len();
    if m > EXACT_CAP {
        return Err(Error::Mode {
            cap: EXACT_CAP,
            got: m,
        });
    }
    let mut adj = vec![0u32; m];
    let mut vol = vec![0.0; m];
    let mut external = vec![0.0; m];
    let mut wmat = vec![vec![0.0; m]; m];
    for (a, &i) in free.iter().enumerate() {
        vol[a] = aug.weighted_degree(i);
        for (j, w) in aug.neighbors(i) {
            match aug.free_index(j) {
                Some(c) => {
                    adj[a] |= 1 << c;
                    wmat[a][c] = w;
                }
                None => external[a] += w,
            }
        }
    }
    let connected = |mask: u32| {
        let start = mask & mask.wrapping_neg();
        let mut seen = start;
        let mut frontier = start;
        while frontier != 0 {
            let mut next = 0;
            let mut f = frontier;
            while f != 0 {
                let b = f.trailing_zeros() as usize;
                f &= f - 1;
                next |= adj[b];
            }
            next &= mask & !seen;
            seen |= next;
            frontier = next;
        }
        seen == mask
    };
    let score = |mask: u32| {
        let mut cut = 0.0;
        let mut v = 0.0;
        let mut bits = mask;
        while bits != 0 {
            let a = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            v += vol[a];
            cut += external[a];
            let mut out = adj[a] & !mask;
            while out != 0 {
                let c = out.trailing_zeros() as usize;
                out &= out - 1;
                cut += wmat[a][c];
            }
        }
        cut / v
    };
    let to_set = |mask: u32| -> Vec<usize> {
        (0..m)
            .filter(|&a| mask >> a & 1 == 1)
            .map(|a| free[a])
            .collect()
    };
    let total: u64 = 1 << m;
    let best = (1..total)
        .into_par_iter()
        .map(|mask| mask as u32)
        .filter(|&mask| connected(mask))
        .map(|mask| (score(mask), mask))
        .reduce_with(|a, b| match a.0.total_cmp(&b.0) {
            Ordering::Less => a,
            Ordering::Greater => b,
            Ordering::Equal => {
                if to_set(a.1) <= to_set(b.1) {
                    a
                } else {
                    b
                }
            }
        })
        .expect("at least one free agent");
    Ok((best.0, to_set(best.1)))
}
