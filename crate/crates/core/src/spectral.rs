//! Spectra of the update operators and the exact convergence time
//! `T = 1/(1 − λ)`.
//!
//! Both operators are reversible, so their similarity transforms
//! `D^{1/2} A D^{−1/2}` are symmetric and power iteration with deflation of
//! the known top pair is exact.

use serde::Serialize;

use crate::error::{domain, param, Result};
use crate::graph::{AugmentedGraph, Graph};
use crate::linalg::{power_iteration, End};

/// Rayleigh-residual target for power iteration.
pub const POWER_TOLERANCE: f64 = 1e-10;
pub const POWER_MAX_ITER: usize = 1_000_000;

/// Spectral summary. The no-stubborn fields and the sub-stochastic field
/// are filled by [`slem`] and [`lambda_sub`] respectively.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralResult {
    /// Second largest eigenvalue (algebraic order).
    pub lambda_2: Option<f64>,
    /// Smallest eigenvalue.
    pub lambda_min: Option<f64>,
    /// Second largest eigenvalue modulus, `max(|λ₂|, |λ_n|)`.
    pub rho_2: Option<f64>,
    /// Perron root of the reduced sub-stochastic operator.
    #[serde(rename = "lambda_A")]
    pub lambda_a: Option<f64>,
    /// `1/(1 − ρ₂)` or `1/(1 − λ_A)`; infinite when the rate is 1.
    #[serde(rename = "T_exact", serialize_with = "finite_or_null")]
    pub t_exact: f64,
    pub iterations: usize,
    pub residual: f64,
    /// Every power iteration met [`POWER_TOLERANCE`].
    pub converged: bool,
}

fn finite_or_null<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn inverse_gap(rate: f64) -> f64 {
    if rate >= 1.0 {
        f64::INFINITY
    } else {
        1.0 / (1.0 - rate)
    }
}

fn modulus_of(l2: f64, ln: f64) -> f64 {
    l2.abs().max(ln.abs())
}

/// `λ₂`, `λ_n` and `ρ₂` of `εI + (1 − ε)A`, `A_ij = w_ij / d_i`.
fn walk_spectrum(g: &Graph, epsilon: f64) -> Result<SpectralResult> {
    g.require_connected()?;
    let n = g.n();
    if n < 2 {
        return domain("spectrum needs at least two agents");
    }
    let strength: Vec<f64> = (0..n).map(|i| g.strength(i)).collect();
    let inv_sqrt: Vec<f64> = strength.iter().map(|s| 1.0 / s.sqrt()).collect();
    let total: f64 = strength.iter().sum();
    let top: Vec<f64> = strength.iter().map(|s| (s / total).sqrt()).collect();
    let apply = |x: &[f64], y: &mut [f64]| {
        for i in 0..n {
            let s: f64 = g
                .neighbors(i)
                .iter()
                .map(|&(j, w)| w * inv_sqrt[j] * x[j])
                .sum();
            y[i] = epsilon * x[i] + (1.0 - epsilon) * inv_sqrt[i] * s;
        }
    };
    let deflate = [top];
    let hi = power_iteration(
        n,
        apply,
        End::Largest,
        &deflate,
        POWER_TOLERANCE,
        POWER_MAX_ITER,
    );
    let lo = power_iteration(
        n,
        apply,
        End::Smallest,
        &deflate,
        POWER_TOLERANCE,
        POWER_MAX_ITER,
    );
    let rho = modulus_of(hi.value, lo.value);
    Ok(SpectralResult {
        lambda_2: Some(hi.value),
        lambda_min: Some(lo.value),
        rho_2: Some(rho),
        lambda_a: None,
        t_exact: inverse_gap(rho),
        iterations: hi.iterations + lo.iterations,
        residual: hi.residual.max(lo.residual),
        converged: hi.converged && lo.converged,
    })
}

/// Spectrum of the no-stubborn best-response operator.
pub fn slem(g: &Graph) -> Result<SpectralResult> {
    walk_spectrum(g, 0.0)
}

/// Spectrum of the self-confidence operator computed directly.
pub fn slem_noisy(g: &Graph, epsilon: f64) -> Result<SpectralResult> {
    check_epsilon(epsilon)?;
    walk_spectrum(g, epsilon)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        param(format!("epsilon must be in (0, 1), got {epsilon}"))
    }
}

/// Maps a no-stubborn spectrum through `λ ↦ ε + (1 − ε)λ`.
pub fn epsilon_shift(spectral: &SpectralResult, epsilon: f64) -> Result<SpectralResult> {
    check_epsilon(epsilon)?;
    let (Some(l2), Some(ln)) = (spectral.lambda_2, spectral.lambda_min) else {
        return domain("epsilon shift needs a no-stubborn spectrum");
    };
    let shift = |l: f64| epsilon + (1.0 - epsilon) * l;
    let (l2, ln) = (shift(l2), shift(ln));
    let rho = modulus_of(l2, ln);
    Ok(SpectralResult {
        lambda_2: Some(l2),
        lambda_min: Some(ln),
        rho_2: Some(rho),
        t_exact: inverse_gap(rho),
        ..spectral.clone()
    })
}

/// Perron root `λ_A` of the reduced operator `Ã` on the free agents.
pub fn lambda_sub(aug: &AugmentedGraph) -> Result<SpectralResult> {
    let (lambda, outcome) = perron(aug)?;
    Ok(SpectralResult {
        lambda_2: None,
        lambda_min: None,
        rho_2: None,
        lambda_a: Some(lambda),
        t_exact: inverse_gap(lambda),
        iterations: outcome.0,
        residual: outcome.1,
        converged: outcome.2,
    })
}

type Diagnostics = (usize, f64, bool);

/// Perron root and Perron vector (in `π̃`-symmetrized coordinates).
pub(crate) fn perron_pair(aug: &AugmentedGraph) -> Result<(f64, Vec<f64>, Diagnostics)> {
    if aug.stubborn().is_empty() {
        return domain("no stubborn agents: the reduced operator is stochastic");
    }
    let free = aug.free_nodes();
    let m = free.len();
    if m == 0 {
        return Ok((0.0, Vec::new(), (0, 0.0, true)));
    }
    let inv_sqrt: Vec<f64> = free
        .iter()
        .map(|&i| 1.0 / aug.weighted_degree(i).sqrt())
        .collect();
    let adj: Vec<Vec<(usize, f64)>> = free
        .iter()
        .map(|&i| {
            aug.neighbors(i)
                .into_iter()
                .filter(|&(j, _)| !aug.is_absorbing(j))
                .map(|(j, w)| (aug.free_index(j).unwrap(), w))
                .collect()
        })
        .collect();
    let apply = |x: &[f64], y: &mut [f64]| {
        for a in 0..m {
            let s: f64 = adj[a].iter().map(|&(c, w)| w * inv_sqrt[c] * x[c]).sum();
            y[a] = inv_sqrt[a] * s;
        }
    };
    let out = power_iteration(m, apply, End::Largest, &[], POWER_TOLERANCE, POWER_MAX_ITER);
    Ok((
        out.value,
        out.vector,
        (out.iterations, out.residual, out.converged),
    ))
}

fn perron(aug: &AugmentedGraph) -> Result<(f64, Diagnostics)> {
    perron_pair(aug).map(|(l, _, d)| (l, d))
}

/// `((1/(1−r)) − 1)·ln(e0/ν) ≤ τ(ν) ≤ (1/(1−r))·ln(e0/ν)`; `None` when
/// `e0 ≤ ν` (the run starts converged).
pub fn tau_bracket(rate: f64, e0: f64, nu: f64) -> Option<(f64, f64)> {
    if !(e0 > nu) || nu <= 0.0 {
        return None;
    }
    let t = inverse_gap(rate);
    let l = (e0 / nu).ln();
    Some(((t - 1.0) * l, t * l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind, Stubbornness, StubbornnessProfile};
    use std::f64::consts::PI;

    fn kind(k: GraphKind) -> Graph {
        generate(&k, None).unwrap()
    }

    #[test]
    fn complete_graph_spectrum() {
        let s = slem(&kind(GraphKind::Complete { n: 5 })).unwrap();
        assert!(s.converged);
        assert!((s.rho_2.unwrap() - 0.25).abs() < 1e-12);
        assert!((s.lambda_2.unwrap() + 0.25).abs() < 1e-12);
    }

    #[test]
    fn ring_spectrum() {
        let s = slem(&kind(GraphKind::Ring { n: 8 })).unwrap();
        assert!((s.lambda_2.unwrap() - (PI / 4.0).cos()).abs() < 1e-10);
        let s = slem(&kind(GraphKind::Ring { n: 6 })).unwrap();
        assert!((s.lambda_min.unwrap() + 1.0).abs() < 1e-10);
        assert!((s.rho_2.unwrap() - 1.0).abs() < 1e-10);
        assert!(s.t_exact.is_infinite() || s.t_exact > 1e9);
        let s = slem(&kind(GraphKind::Ring { n: 5 })).unwrap();
        assert!((s.rho_2.unwrap() - (PI / 5.0).cos()).abs() < 1e-10);
    }

    #[test]
    fn epsilon_shift_matches_direct_computation() {
        let g = kind(GraphKind::Complete { n: 5 });
        let shifted = epsilon_shift(&slem(&g).unwrap(), 0.5).unwrap();
        let direct = slem_noisy(&g, 0.5).unwrap();
        assert!((shifted.lambda_2.unwrap() - 0.375).abs() < 1e-12);
        assert!((shifted.lambda_2.unwrap() - direct.lambda_2.unwrap()).abs() < 1e-10);
        assert!((shifted.rho_2.unwrap() - direct.rho_2.unwrap()).abs() < 1e-10);

        let ring = kind(GraphKind::Ring { n: 10 });
        for eps in [0.1, 0.3, 0.75] {
            let shifted = epsilon_shift(&slem(&ring).unwrap(), eps).unwrap();
            assert!((shifted.lambda_min.unwrap() - (-1.0 + 2.0 * eps)).abs() < 1e-10);
            let direct = slem_noisy(&ring, eps).unwrap();
            assert!((shifted.lambda_2.unwrap() - direct.lambda_2.unwrap()).abs() < 1e-10);
            assert!((shifted.lambda_min.unwrap() - direct.lambda_min.unwrap()).abs() < 1e-10);
        }
        assert!(epsilon_shift(&slem(&ring).unwrap(), 0.0).is_err());
        assert!(epsilon_shift(&slem(&ring).unwrap(), 1.0).is_err());
    }

    #[test]
    fn immediate_absorption() {
        let g = kind(GraphKind::Line { n: 2 });
        let p = StubbornnessProfile::with(2, &[(1, Stubbornness::Full)]).unwrap();
        let s = lambda_sub(&AugmentedGraph::build(&g, &p).unwrap()).unwrap();
        assert_eq!(s.lambda_a, Some(0.0));
        assert_eq!(s.t_exact, 1.0);

        let star = kind(GraphKind::Star { n: 9 });
        let p = StubbornnessProfile::with(9, &[(0, Stubbornness::Full)]).unwrap();
        let s = lambda_sub(&AugmentedGraph::build(&star, &p).unwrap()).unwrap();
        assert!(s.lambda_a.unwrap().abs() < 1e-14);
        assert!((s.t_exact - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lambda_sub_needs_stubborn_agents() {
        let g = kind(GraphKind::Ring { n: 5 });
        let aug = AugmentedGraph::build(&g, &StubbornnessProfile::none(5)).unwrap();
        assert!(lambda_sub(&aug).is_err());
    }

    #[test]
    fn perron_vector_is_positive() {
        let g = kind(GraphKind::Grid { side: 4 });
        let p = StubbornnessProfile::with(
            16,
            &[(0, Stubbornness::Finite(0.5)), (10, Stubbornness::Full)],
        )
        .unwrap();
        let aug = AugmentedGraph::build(&g, &p).unwrap();
        let (l, v, (_, _, ok)) = perron_pair(&aug).unwrap();
        assert!(ok);
        assert!(l > 0.0 && l < 1.0);
        assert!(v.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn more_stubbornness_never_slows_convergence() {
        let g = generate(&GraphKind::ErdosRenyi { n: 14, p: 0.3 }, Some(8)).unwrap();
        assert!(g.is_connected());
        let mut prev = f64::INFINITY;
        for k in [0.1, 0.5, 2.0, 10.0] {
            let p = StubbornnessProfile::with(14, &[(3, Stubbornness::Finite(k))]).unwrap();
            let l = lambda_sub(&AugmentedGraph::build(&g, &p).unwrap())
                .unwrap()
                .lambda_a
                .unwrap();
            assert!(l <= prev + 1e-12);
            prev = l;
        }
        let p = StubbornnessProfile::with(
            14,
            &[(3, Stubbornness::Finite(10.0)), (9, Stubbornness::Full)],
        )
        .unwrap();
        let l = lambda_sub(&AugmentedGraph::build(&g, &p).unwrap())
            .unwrap()
            .lambda_a
            .unwrap();
        assert!(l <= prev + 1e-12);
    }

    #[test]
    fn tau_bracket_orders_and_degenerates() {
        let (lo, hi) = tau_bracket(0.9, 1.0, 1e-6).unwrap();
        assert!(lo < hi);
        assert!((hi - 10.0 * (1e6f64).ln()).abs() < 1e-9);
        assert!((lo - 9.0 * (1e6f64).ln()).abs() < 1e-9);
        assert_eq!(tau_bracket(0.9, 1e-7, 1e-6), None);
    }

    #[test]
    fn json_field_names() {
        let s = slem(&kind(GraphKind::Complete { n: 4 })).unwrap();
        let v = serde_json::to_value(&s).unwrap();
        for key in [
            "lambda_2",
            "lambda_min",
            "rho_2",
            "lambda_A",
            "T_exact",
            "iterations",
            "residual",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
