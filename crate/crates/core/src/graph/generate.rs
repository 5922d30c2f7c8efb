//! Deterministic and seeded random graph generators.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg64Mcg;
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{param, Error, Result};

/// Pairing attempts before `random_regular` gives up.
pub const RANDOM_REGULAR_RETRIES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphKind {
    Complete {
        n: usize,
    },
    Ring {
        n: usize,
    },
    Line {
        n: usize,
    },
    /// `side × side` lattice, row-major node order.
    Grid {
        side: usize,
    },
    /// Node 0 is the center, nodes `1..n` are leaves.
    Star {
        n: usize,
    },
    ErdosRenyi {
        n: usize,
        p: f64,
    },
    /// Grid plus `q` long-range shortcuts per node, destination drawn with
    /// probability proportional to `‖i − j‖₁^(−α)`.
    SmallWorld {
        side: usize,
        q: usize,
        alpha: f64,
    },
    RandomRegular {
        n: usize,
        d: usize,
    },
}

impl GraphKind {
    /// Erdős–Rényi with the connectivity-regime edge probability
    /// `p = λ ln n / n`.
    pub fn erdos_renyi_lambda(n: usize, lambda: f64) -> Result<Self> {
        if n < 2 {
            return param("erdos_renyi needs n >= 2");
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return param(format!("lambda must be positive, got {lambda}"));
        }
        let p = lambda * (n as f64).ln() / n as f64;
        if p > 1.0 {
            return param(format!("lambda = {lambda} gives p = {p} > 1"));
        }
        Ok(GraphKind::ErdosRenyi { n, p })
    }

    pub fn is_randomized(&self) -> bool {
        matches!(
            self,
            GraphKind::ErdosRenyi { .. }
                | GraphKind::SmallWorld { .. }
                | GraphKind::RandomRegular { .. }
        )
    }
}

/// Builds the graph named by `kind`. Randomized kinds require a seed and
/// are reproducible for a fixed seed.
pub fn generate(kind: &GraphKind, seed: Option<u64>) -> Result<Graph> {
    let seed = match (kind.is_randomized(), seed) {
        (true, None) => return param("a seed is required for randomized generators"),
        (_, s) => s.unwrap_or(0),
    };
    match *kind {
        GraphKind::Complete { n } => {
            need(n >= 2, "complete graph needs n >= 2")?;
            Graph::from_pairs(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
        }
        GraphKind::Ring { n } => {
            need(n >= 3, "ring needs n >= 3")?;
            Graph::from_pairs(n, (0..n).map(|i| (i, (i + 1) % n)))
        }
        GraphKind::Line { n } => {
            need(n >= 2, "line needs n >= 2")?;
            Graph::from_pairs(n, (0..n - 1).map(|i| (i, i + 1)))
        }
        GraphKind::Grid { side } => {
            need(side >= 2, "grid needs side >= 2")?;
            Graph::from_pairs(side * side, grid_pairs(side))
        }
        GraphKind::Star { n } => {
            need(n >= 2, "star needs n >= 2")?;
            Graph::from_pairs(n, (1..n).map(|j| (0, j)))
        }
        GraphKind::ErdosRenyi { n, p } => erdos_renyi(n, p, seed),
        GraphKind::SmallWorld { side, q, alpha } => {
            small_world(side, q, alpha, seed).map(|(g, _)| g)
        }
        GraphKind::RandomRegular { n, d } => random_regular(n, d, seed),
    }
}

fn need(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        param(msg)
    }
}

fn grid_pairs(side: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(2 * side * (side - 1));
    for r in 0..side {
        for c in 0..side {
            let i = r * side + c;
            if c + 1 < side {
                pairs.push((i, i + 1));
            }
            if r + 1 < side {
                pairs.push((i, i + side));
            }
        }
    }
    pairs
}

fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    need(n >= 2, "erdos_renyi needs n >= 2")?;
    need((0.0..=1.0).contains(&p), "erdos_renyi needs p in [0, 1]")?;
    let mut rng = Pcg64Mcg::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                pairs.push((i, j));
            }
        }
    }
    Graph::from_pairs(n, pairs)
}

/// Shortcut bookkeeping from the small-world generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmallWorldStats {
    /// Shortcut draws, always `q · n`.
    pub attempted: usize,
    /// Draws that landed on an existing edge and were discarded.
    pub dropped: usize,
}

/// Small-world graph together with shortcut statistics.
///
/// The destination normalization is exact: for every source node the
/// distance histogram over all other nodes is tabulated, a distance is
/// drawn with weight `count(d) · d^(−α)`, then a node is drawn uniformly
/// among those at that distance.
pub fn small_world(
    side: usize,
    q: usize,
    alpha: f64,
    seed: u64,
) -> Result<(Graph, SmallWorldStats)> {
    need(side >= 2, "small_world needs side >= 2")?;
    need(
        alpha.is_finite() && alpha >= 0.0,
        "small_world needs alpha >= 0",
    )?;
    let n = side * side;
    let max_d = 2 * (side - 1);
    let dist_weight: Vec<f64> = (0..=max_d)
        .map(|d| if d == 0 { 0.0 } else { (d as f64).powf(-alpha) })
        .collect();

    let mut present: BTreeSet<(usize, usize)> = grid_pairs(side).into_iter().collect();
    let mut rng = Pcg64Mcg::seed_from_u64(seed);
    let mut counts = vec![0usize; max_d + 1];
    let mut stats = SmallWorldStats {
        attempted: 0,
        dropped: 0,
    };

    for i in 0..n {
        let (ri, ci) = (i / side, i % side);
        let l1 = |k: usize| ri.abs_diff(k / side) + ci.abs_diff(k % side);
        counts.iter_mut().for_each(|c| *c = 0);
        for k in 0..n {
            counts[l1(k)] += 1;
        }
        let total: f64 = (1..=max_d).map(|d| counts[d] as f64 * dist_weight[d]).sum();
        for _ in 0..q {
            stats.attempted += 1;
            let mut u = rng.random::<f64>() * total;
            let mut d = max_d;
            for (dd, &c) in counts.iter().enumerate().skip(1) {
                let mass = c as f64 * dist_weight[dd];
                if u < mass {
                    d = dd;
                    break;
                }
                u -= mass;
            }
            // guard against round-off landing past the last nonempty shell
            while counts[d] == 0 {
                d -= 1;
            }
            let pick = rng.random_range(0..counts[d]);
            let j = (0..n).filter(|&k| l1(k) == d).nth(pick).unwrap();
            let key = (i.min(j), i.max(j));
            if !present.insert(key) {
                stats.dropped += 1;
            }
        }
    }
    let g = Graph::from_pairs(n, present)?;
    Ok((g, stats))
}

fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    need(n >= 2, "random_regular needs n >= 2")?;
    need(d >= 1 && d < n, "random_regular needs 1 <= d < n")?;
    need((n * d).is_multiple_of(2), "random_regular needs n*d even")?;
    let mut rng = Pcg64Mcg::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, d)).collect();
    'attempt: for _ in 0..RANDOM_REGULAR_RETRIES {
        points.shuffle(&mut rng);
        let mut seen = BTreeSet::new();
        for pair in points.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b || !seen.insert((a, b)) {
                continue 'attempt;
            }
        }
        return Graph::from_pairs(n, seen);
    }
    Err(Error::Generation(format!(
        "configuration model found no simple {d}-regular graph on {n} nodes in {RANDOM_REGULAR_RETRIES} attempts"
    )))
}
