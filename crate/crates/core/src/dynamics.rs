//! Synchronous best-response dynamics, the self-confidence variant, and
//! error norms.

use serde::{Deserialize, Serialize};

use crate::error::{domain, param, Result};
use crate::graph::{stationary_distribution, AugmentedGraph, Graph, NodeRole, StubbornnessProfile};

/// Slack allowed by [`decay_check`] on top of `rate · ‖e(t)‖`.
pub const DECAY_SLACK: f64 = 1e-9;
/// A period-2 cycle needs `‖x(t+2) − x(t)‖_∞` within this fraction of
/// `‖x(t+1) − x(t)‖_∞`, or below [`OSCILLATION_FLOOR`].
pub const OSCILLATION_TOL: f64 = 1e-10;
/// Roundoff level at which `x(t+2)` and `x(t)` count as equal.
pub const OSCILLATION_FLOOR: f64 = 1e-15;
/// Consecutive steps the period-2 pattern must persist.
pub const OSCILLATION_STREAK: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct OpinionState {
    pub x: Vec<f64>,
    pub x0: Vec<f64>,
    pub t: usize,
}

impl OpinionState {
    /// Initial state `x(0) = x0`. Opinions must lie in `[0, 1]`.
    pub fn new(x0: Vec<f64>) -> Result<Self> {
        check_opinions(&x0)?;
        Ok(OpinionState {
            x: x0.clone(),
            x0,
            t: 0,
        })
    }
}

pub(crate) fn check_opinions(x0: &[f64]) -> Result<()> {
    for (i, &v) in x0.iter().enumerate() {
        if !(0.0..=1.0).contains(&v) {
            return param(format!(
                "initial opinion of agent {i} is {v}, outside [0, 1]"
            ));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// Weighted by `π` (no stubborn agents) or `π̃` on the free agents.
    Pi,
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsConfig {
    /// Self-confidence, `0 ≤ ε < 1`.
    pub epsilon: f64,
    /// Convergence threshold.
    pub nu: f64,
    pub max_steps: usize,
    pub norm: NormKind,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            epsilon: 0.0,
            nu: 1e-9,
            max_steps: 100_000,
            norm: NormKind::Pi,
        }
    }
}

impl DynamicsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.epsilon) {
            return param(format!("epsilon must be in [0, 1), got {}", self.epsilon));
        }
        if !(self.nu > 0.0) {
            return param(format!("nu must be positive, got {}", self.nu));
        }
        if self.max_steps == 0 {
            return param("max_steps must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxSteps,
    Oscillating,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// `x(0), …, x(T_stop)`.
    pub states: Vec<Vec<f64>>,
    /// `‖x(t) − x(∞)‖` per recorded state, when an equilibrium was given.
    pub errors: Option<Vec<f64>>,
    pub stop: StopReason,
    pub norm: NormKind,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().unwrap()
    }
}

/// Cost of agent `i`: `½ Σ_j w_ij (x_i − x_j)² + ½ K_i (x_i − x0_i)²`.
pub fn cost(
    i: usize,
    x: &[f64],
    x0: &[f64],
    profile: &StubbornnessProfile,
    g: &Graph,
) -> Result<f64> {
    if profile.role(i) == NodeRole::Full {
        return domain(format!(
            "agent {i} is fully stubborn; its cost is an infinite penalty"
        ));
    }
    let social: f64 = g
        .neighbors(i)
        .iter()
        .map(|&(j, w)| w * (x[i] - x[j]).powi(2))
        .sum();
    Ok(0.5 * social + 0.5 * profile.k(i) * (x[i] - x0[i]).powi(2))
}

/// One synchronous best-response round.
pub fn best_response_step(
    state: &OpinionState,
    g: &Graph,
    profile: &StubbornnessProfile,
) -> OpinionState {
    let mut next = vec![0.0; state.x.len()];
    best_response_into(&state.x, &state.x0, g, profile, &mut next);
    OpinionState {
        x: next,
        x0: state.x0.clone(),
        t: state.t + 1,
    }
}

fn best_response_into(
    x: &[f64],
    x0: &[f64],
    g: &Graph,
    profile: &StubbornnessProfile,
    out: &mut [f64],
) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = match profile.role(i) {
            NodeRole::Full => x0[i],
            _ => {
                let k = profile.k(i);
                let pull: f64 = g.neighbors(i).iter().map(|&(j, w)| w * x[j]).sum();
                (pull + k * x0[i]) / (g.strength(i) + k)
            }
        };
    }
}

/// One round with self-confidence `ε`:
/// `x'_i = (1 − ε) · avg_{j∈∂i} x_j + ε x_i`.
pub fn noisy_step(state: &OpinionState, g: &Graph, epsilon: f64) -> Result<OpinionState> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return param(format!("epsilon must be in (0, 1), got {epsilon}"));
    }
    let mut next = vec![0.0; state.x.len()];
    noisy_into(&state.x, g, epsilon, &mut next);
    Ok(OpinionState {
        x: next,
        x0: state.x0.clone(),
        t: state.t + 1,
    })
}

fn noisy_into(x: &[f64], g: &Graph, epsilon: f64, out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        let avg: f64 = g.neighbors(i).iter().map(|&(j, w)| w * x[j]).sum::<f64>() / g.strength(i);
        *o = (1.0 - epsilon) * avg + epsilon * x[i];
    }
}

/// `(Σ v_i² dist_i)^{1/2}`.
pub fn pi_norm(v: &[f64], dist: &[f64]) -> Result<f64> {
    if v.len() != dist.len() {
        return param(format!(
            "vector has {} entries, distribution {}",
            v.len(),
            dist.len()
        ));
    }
    if let Some(p) = dist.iter().find(|&&p| p < 0.0 || p.is_nan()) {
        return param(format!("distribution has negative entry {p}"));
    }
    Ok(v.iter()
        .zip(dist)
        .map(|(x, p)| x * x * p)
        .sum::<f64>()
        .sqrt())
}

/// Per-agent weights for the configured norm: `π` without stubborn
/// agents, `π̃` on free agents (zero on fully stubborn ones) otherwise,
/// all ones for the Euclidean norm.
pub fn norm_weights(g: &Graph, profile: &StubbornnessProfile, kind: NormKind) -> Result<Vec<f64>> {
    match kind {
        NormKind::Euclidean => Ok(vec![1.0; g.n()]),
        NormKind::Pi if !profile.has_stubborn() => stationary_distribution(g),
        NormKind::Pi => {
            let aug = AugmentedGraph::build(g, profile)?;
            let mut w = vec![0.0; g.n()];
            for (&i, p) in aug.free_nodes().iter().zip(aug.free_stationary()) {
                w[i] = p;
            }
            Ok(w)
        }
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Iterates the dynamics from `x0` until the stopping rule fires.
///
/// With an `equilibrium`, the run stops once `‖x(t) − x(∞)‖ ≤ ν` in the
/// configured norm; otherwise once `‖x(t+1) − x(t)‖_∞ ≤ ν`. A period-2
/// cycle (`‖x(t+2) − x(t)‖_∞ ≤ max(1e−10 ‖x(t+1) − x(t)‖_∞, 1e−15)` while
/// `‖x(t+1) − x(t)‖_∞ > ν`, for ten consecutive steps) stops the run as
/// oscillating; a slowly decaying alternation does not qualify.
pub fn run(
    g: &Graph,
    profile: &StubbornnessProfile,
    x0: &[f64],
    config: &DynamicsConfig,
    equilibrium: Option<&[f64]>,
) -> Result<Trajectory> {
    config.validate()?;
    g.require_connected()?;
    if x0.len() != g.n() || profile.len() != g.n() {
        return param("opinion and profile lengths must equal the number of agents");
    }
    check_opinions(x0)?;
    if let Some(eq) = equilibrium {
        if eq.len() != g.n() {
            return param("equilibrium length must equal the number of agents");
        }
    }
    let noisy = config.epsilon > 0.0;
    if noisy && profile.has_stubborn() {
        return param("self-confidence dynamics are defined without stubborn agents");
    }
    let weights = norm_weights(g, profile, config.norm)?;
    let error_of = |x: &[f64], eq: &[f64]| -> f64 {
        x.iter()
            .zip(eq)
            .zip(&weights)
            .map(|((a, b), w)| (a - b).powi(2) * w)
            .sum::<f64>()
            .sqrt()
    };

    let mut states = vec![x0.to_vec()];
    let mut errors = equilibrium.map(|eq| vec![error_of(x0, eq)]);
    let mut streak = 0;
    let mut next = vec![0.0; g.n()];
    let stop = loop {
        let t = states.len() - 1;
        if let (Some(errs), true) = (&errors, equilibrium.is_some()) {
            if *errs.last().unwrap() <= config.nu {
                break StopReason::Converged;
            }
        }
        if t >= config.max_steps {
            break StopReason::MaxSteps;
        }
        let x = &states[t];
        if noisy {
            noisy_into(x, g, config.epsilon, &mut next);
        } else {
            best_response_into(x, x0, g, profile, &mut next);
        }
        let step_diff = max_abs_diff(&next, x);
        states.push(next.clone());
        if let (Some(errs), Some(eq)) = (&mut errors, equilibrium) {
            errs.push(error_of(&next, eq));
        } else if step_diff <= config.nu {
            break StopReason::Converged;
        }
        if t >= 1 {
            let two_back = &states[t - 1];
            let drift = max_abs_diff(&next, two_back);
            if drift <= (OSCILLATION_TOL * step_diff).max(OSCILLATION_FLOOR)
                && step_diff > config.nu
            {
                streak += 1;
                if streak >= OSCILLATION_STREAK {
                    break StopReason::Oscillating;
                }
            } else {
                streak = 0;
            }
        }
    };
    Ok(Trajectory {
        states,
        errors,
        stop,
        norm: config.norm,
    })
}

/// Outcome of checking `‖e(t+1)‖ ≤ rate · ‖e(t)‖ + 1e−9` along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayReport {
    pub holds: bool,
    /// Largest observed `‖e(t+1)‖ / ‖e(t)‖` over steps with `‖e(t)‖ > 1e−9`.
    pub max_ratio: f64,
    /// Largest `‖e(t+1)‖ − rate · ‖e(t)‖`.
    pub max_violation: f64,
}

pub fn decay_check(trajectory: &Trajectory, rate: f64) -> Result<DecayReport> {
    let Some(errors) = &trajectory.errors else {
        return domain("trajectory carries no equilibrium reference");
    };
    let mut max_ratio: f64 = 0.0;
    let mut max_violation = f64::NEG_INFINITY;
    for pair in errors.windows(2) {
        let (now, next) = (pair[0], pair[1]);
        if now > DECAY_SLACK {
            max_ratio = max_ratio.max(next / now);
        }
        max_violation = max_violation.max(next - rate * now);
    }
    if errors.len() < 2 {
        max_violation = 0.0;
    }
    Ok(DecayReport {
        holds: max_violation <= DECAY_SLACK,
        max_ratio,
        max_violation,
    })
}
