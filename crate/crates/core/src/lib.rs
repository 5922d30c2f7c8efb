//! Best-response opinion dynamics with stubborn agents.
//!
//! Graphs and stubbornness profiles live in [`graph`]; [`dynamics`] runs the
//! synchronous update; [`equilibrium`] computes the limit by several
//! independent routes; [`spectral`] gives exact convergence rates and
//! [`bounds`] the path and conductance bounds on them. [`io`] holds the
//! plain-text formats.

pub mod bounds;
pub mod dynamics;
pub mod equilibrium;
mod error;
pub mod graph;
pub mod io;
mod linalg;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{AugmentedGraph, Graph, GraphKind, Stubbornness, StubbornnessProfile};
