//! Path-congestion upper bounds, conductance lower bounds and the
//! canonical shortest-path bound suite for `T = 1/(1 − λ_A)`.

mod canonical;
mod conductance;
mod paths;

pub use canonical::{
    bound_report, canonical, canonical_report, placement_score, BoundReport, Canonical,
    PlacementScore, Regime, PLACEMENT_EXACT_LIMIT,
};
pub use conductance::{
    conductance_lower, psi, psi_free, ConductanceMode, ConductanceResult, EXACT_CAP,
};
pub use paths::{
    bottleneck, eta_at, eta_bound, shortest_path_forest, xi_bound, Congestion, PathSet,
};
